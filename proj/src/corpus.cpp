#include "shellgate/corpus.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <regex>
#include <unordered_set>

#include <json.hpp>

#include "shellgate/error.hpp"

namespace shellgate {

namespace {

using json = nlohmann::json;

constexpr size_t kPcapGlobalHeader = 24;
constexpr size_t kPcapRecordHeader = 16;
constexpr uint32_t kPcapMagic = 0xA1B2C3D4;
constexpr uint32_t kPcapMagicSwapped = 0xD4C3B2A1;
constexpr uint32_t kLinktypeEthernet = 1;

uint32_t read_u32(const unsigned char* p, bool swap) {
    uint32_t v = static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
                 static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
    if (swap) v = __builtin_bswap32(v);
    return v;
}

uint16_t read_u16_be(const unsigned char* p) {
    return static_cast<uint16_t>(static_cast<uint16_t>(p[0]) << 8 | p[1]);
}

bool filter_printable(unsigned char c) {
    return printable_byte(c) || c == '\r' || c == '\n';
}

bool plaintext_payload(std::string_view payload) {
    static constexpr std::string_view prefixes[] = {"GET",    "POST",    "HEAD", "PUT",
                                                    "DELETE", "OPTIONS", "HTTP/"};
    for (auto p : prefixes)
        if (payload.substr(0, p.size()) == p) return true;
    size_t printable = 0;
    for (unsigned char c : payload)
        if (filter_printable(c)) ++printable;
    return static_cast<double>(printable) >= 0.90 * static_cast<double>(payload.size());
}

bool valid_utf8(std::string_view s) {
    size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        size_t extra;
        unsigned cp_min;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            extra = 1;
            cp_min = 0x80;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            cp_min = 0x800;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            cp_min = 0x10000;
        } else {
            return false;
        }
        if (i + extra >= s.size()) return false;
        unsigned cp = c & (0x3F >> extra);
        for (size_t k = 1; k <= extra; ++k) {
            unsigned char cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (cp < cp_min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += extra + 1;
    }
    return true;
}

// Replaces ill-formed sequences with U+FFFD.
std::string to_valid_utf8(std::string_view s) {
    if (valid_utf8(s)) return std::string(s);
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        size_t extra = 0;
        if (c < 0x80)
            extra = 0;
        else if ((c & 0xE0) == 0xC0)
            extra = 1;
        else if ((c & 0xF0) == 0xE0)
            extra = 2;
        else if ((c & 0xF8) == 0xF0)
            extra = 3;
        else {
            out += "\xEF\xBF\xBD";
            ++i;
            continue;
        }
        if (extra == 0) {
            out += static_cast<char>(c);
            ++i;
            continue;
        }
        if (i + extra < s.size() && valid_utf8(s.substr(i, extra + 1))) {
            out.append(s.substr(i, extra + 1));
            i += extra + 1;
        } else {
            out += "\xEF\xBF\xBD";
            ++i;
        }
    }
    return out;
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

RuleKind parse_rule_kind(const std::string& s) {
    if (s == "prefix") return RuleKind::Prefix;
    if (s == "keyword") return RuleKind::Keyword;
    if (s == "delimited") return RuleKind::Delimited;
    throw ConfigError("unknown rule kind: " + s);
}

}  // namespace

std::vector<StringRun> scan_strings(std::string_view data, size_t min_len) {
    if (min_len < 1) throw ContractError("scan_strings: min_len must be >= 1");
    std::vector<StringRun> runs;
    size_t i = 0;
    const size_t n = data.size();
    while (i < n) {
        if (!printable_byte(static_cast<unsigned char>(data[i]))) {
            ++i;
            continue;
        }
        size_t begin = i;
        while (i < n && printable_byte(static_cast<unsigned char>(data[i]))) ++i;
        if (i - begin >= min_len) runs.push_back({Bytes(data.substr(begin, i - begin)), begin});
    }
    return runs;
}

std::vector<Command> match_commands(const std::vector<StringRun>& runs,
                                    const std::vector<ExtractionRule>& rules, Label label,
                                    const std::string& source_id) {
    if (rules.empty()) throw ContractError("match_commands: rules must be non-empty");
    std::vector<Command> out;
    for (const auto& run : runs) {
        const std::string_view text(run.bytes);
        for (const auto& rule : rules) {
            std::string_view extracted;
            switch (rule.kind) {
                case RuleKind::Prefix:
                    if (text.substr(0, rule.anchor.size()) == rule.anchor) extracted = text;
                    break;
                case RuleKind::Keyword:
                    if (text.find(rule.anchor) != std::string_view::npos) extracted = text;
                    break;
                case RuleKind::Delimited: {
                    size_t open = text.find(rule.anchor);
                    if (open == std::string_view::npos) break;
                    size_t close = text.find(rule.anchor_close, open + rule.anchor.size());
                    if (close == std::string_view::npos) break;
                    extracted = text.substr(open, close - open);
                    break;
                }
            }
            if (extracted.empty() || extracted.size() < rule.min_len) continue;
            out.push_back({Bytes(extracted), label, source_id + ":" + std::to_string(run.offset),
                           SourceKind::BinaryStrings});
            break;  // first matching rule wins
        }
    }
    return out;
}

PcapExtraction extract_pcap_payloads(std::string_view capture, const std::string& source_id,
                                     Label label) {
    PcapExtraction result;
    if (capture.size() < kPcapGlobalHeader)
        throw DataError(source_id + ": not a pcap file (short global header)");
    const auto* base = reinterpret_cast<const unsigned char*>(capture.data());
    uint32_t magic = read_u32(base, false);
    bool swap;
    if (magic == kPcapMagic)
        swap = false;
    else if (magic == kPcapMagicSwapped)
        swap = true;
    else
        throw DataError(source_id + ": not a pcap file (bad magic)");
    const uint32_t linktype = read_u32(base + 20, swap);

    size_t pos = kPcapGlobalHeader;
    size_t index = 0;
    while (pos < capture.size()) {
        if (pos + kPcapRecordHeader > capture.size()) {
            ++result.counters.truncated;
            break;
        }
        const uint32_t incl_len = read_u32(base + pos + 8, swap);
        pos += kPcapRecordHeader;
        if (pos + incl_len > capture.size()) {
            ++result.counters.truncated;
            break;
        }
        const unsigned char* pkt = base + pos;
        pos += incl_len;
        ++result.counters.records;
        const size_t record_index = index++;

        if (linktype != kLinktypeEthernet) {
            ++result.counters.skipped_linktype;
            continue;
        }
        if (incl_len < 14) continue;
        if (read_u16_be(pkt + 12) != 0x0800) continue;  // IPv4 only

        const unsigned char* ip = pkt + 14;
        size_t ip_avail = incl_len - 14;
        if (ip_avail < 20 || (ip[0] >> 4) != 4) continue;
        const size_t ihl = static_cast<size_t>(ip[0] & 0x0F) * 4;
        const size_t total_len = read_u16_be(ip + 2);
        if (ihl < 20 || total_len < ihl || ip_avail < ihl) continue;
        if (ip[9] != 6) continue;  // TCP

        const unsigned char* tcp = ip + ihl;
        size_t tcp_avail = std::min<size_t>(ip_avail, total_len) - ihl;
        if (tcp_avail < 20) continue;
        const size_t doff = static_cast<size_t>(tcp[12] >> 4) * 4;
        if (doff < 20 || tcp_avail < doff) continue;

        std::string_view payload(reinterpret_cast<const char*>(tcp + doff), tcp_avail - doff);
        if (payload.empty()) continue;
        if (!plaintext_payload(payload)) {
            ++result.counters.filtered;
            continue;
        }
        result.commands.push_back({Bytes(payload), label,
                                   source_id + ":" + std::to_string(record_index),
                                   SourceKind::PcapPayload});
    }
    return result;
}

TextLoadResult load_text_commands(std::istream& lines, Label label, const std::string& source_id) {
    TextLoadResult result;
    std::string line;
    size_t lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string text = trim(line);
        if (text.empty()) continue;
        if (!valid_utf8(text)) {
            text = to_valid_utf8(text);
            ++result.invalid_utf8_lines;
        }
        result.commands.push_back({std::move(text), label,
                                   source_id + ":" + std::to_string(lineno),
                                   SourceKind::TextList});
    }
    return result;
}

Bytes redact_text(const Bytes& text) {
    static const std::regex ip_re(R"((\d{1,3}\.){3}\d{1,3})");
    static const std::regex user_re(R"(((?:^|\s)(?:-u|--user)\s+)\S+)");
    static const std::regex home_re(R"(/home/[^/\s]+/)");
    std::string out = std::regex_replace(text, ip_re, "0.0.0.0");
    out = std::regex_replace(out, user_re, "$1USER");
    out = std::regex_replace(out, home_re, "/home/USER/");
    return out;
}

Command redact(const Command& command) {
    Command out = command;
    out.text = redact_text(command.text);
    return out;
}

std::vector<ExtractionRule> default_rules() {
    // Keyword families from the shell-builtin, HTTP-verb and downloader
    // groups. Order is the tie-break.
    std::vector<ExtractionRule> rules = {
        {"cd", RuleKind::Prefix, "cd ", "", 5},
        {"if_fi", RuleKind::Delimited, "if ", "fi", 5},
        {"kill", RuleKind::Prefix, "kill ", "", 5},
        {"wait", RuleKind::Prefix, "wait", "", 4},
        {"disown", RuleKind::Prefix, "disown", "", 6},
        {"suspend", RuleKind::Prefix, "suspend", "", 7},
        {"fc", RuleKind::Prefix, "fc ", "", 5},
        {"history", RuleKind::Prefix, "history", "", 7},
        {"break", RuleKind::Prefix, "break", "", 5},
        {"http_get", RuleKind::Prefix, "GET ", "", 5},
        {"http_post", RuleKind::Prefix, "POST ", "", 6},
        {"tftp", RuleKind::Keyword, "tftp ", "", 5},
        {"wget", RuleKind::Keyword, "wget ", "", 5},
        {"chmod", RuleKind::Keyword, "chmod ", "", 6},
        {"rm", RuleKind::Keyword, "rm -", "", 5},
        {"busybox", RuleKind::Keyword, "busybox ", "", 8},
    };
    return rules;
}

void validate_rules(const std::vector<ExtractionRule>& rules) {
    std::unordered_set<std::string> ids;
    for (const auto& r : rules) {
        if (r.rule_id.empty()) throw ConfigError("rule with empty rule_id");
        if (!ids.insert(r.rule_id).second) throw ConfigError("duplicate rule_id: " + r.rule_id);
        if (r.anchor.empty()) throw ConfigError("rule " + r.rule_id + ": empty anchor");
        if (r.kind == RuleKind::Delimited && r.anchor_close.empty())
            throw ConfigError("rule " + r.rule_id + ": delimited rule needs anchor_close");
        if (r.min_len < 1) throw ConfigError("rule " + r.rule_id + ": min_len must be >= 1");
    }
}

std::vector<ExtractionRule> parse_rules_jsonl(std::istream& in) {
    std::vector<ExtractionRule> rules;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ConfigError("rules line " + std::to_string(lineno) + ": " + e.what());
        }
        ExtractionRule r;
        r.rule_id = j.at("rule_id").get<std::string>();
        r.kind = parse_rule_kind(j.at("kind").get<std::string>());
        r.anchor = j.at("anchor").get<std::string>();
        if (j.contains("anchor_close")) r.anchor_close = j["anchor_close"].get<std::string>();
        if (j.contains("min_len")) r.min_len = j["min_len"].get<size_t>();
        rules.push_back(std::move(r));
    }
    validate_rules(rules);
    return rules;
}

std::string label_name(Label l) { return l == Label::Malicious ? "malicious" : "benign"; }

Label parse_label(std::string_view s) {
    if (s == "malicious") return Label::Malicious;
    if (s == "benign") return Label::Benign;
    throw ConfigError("unknown label: " + std::string(s));
}

std::string source_kind_name(SourceKind k) {
    switch (k) {
        case SourceKind::BinaryStrings: return "binary_strings";
        case SourceKind::PcapPayload: return "pcap_payload";
        case SourceKind::TextList: return "text_list";
    }
    return "text_list";
}

namespace {
SourceKind parse_source_kind(std::string_view s) {
    if (s == "binary_strings") return SourceKind::BinaryStrings;
    if (s == "pcap_payload") return SourceKind::PcapPayload;
    if (s == "text_list") return SourceKind::TextList;
    throw DataError("unknown source_kind: " + std::string(s));
}
}  // namespace

void write_commands_jsonl(std::ostream& out, const std::vector<Command>& commands) {
    for (const auto& c : commands) {
        json j;
        j["text"] = c.text;
        j["label"] = label_name(c.label);
        j["source_id"] = c.source_id;
        j["source_kind"] = source_kind_name(c.source_kind);
        // Raw bytes may not be UTF-8; escape lossily with U+FFFD.
        out << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
}

std::vector<Command> read_commands_jsonl(std::istream& in, const std::string& source_id) {
    std::vector<Command> commands;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(source_id + " line " + std::to_string(lineno) + ": " + e.what());
        }
        Command c;
        c.text = j.at("text").get<std::string>();
        c.label = parse_label(j.at("label").get<std::string>());
        c.source_id = j.value("source_id", source_id + ":" + std::to_string(lineno));
        c.source_kind = parse_source_kind(j.value("source_kind", "text_list"));
        if (c.text.empty())
            throw DataError(source_id + " line " + std::to_string(lineno) + ": empty text");
        commands.push_back(std::move(c));
    }
    return commands;
}

}  // namespace shellgate
