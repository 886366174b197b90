#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace shellgate {

using Bytes = std::string;

enum class Label : uint8_t { Benign = 0, Malicious = 1 };

enum class SourceKind : uint8_t { BinaryStrings, PcapPayload, TextList };

// One shell command, the unit of classification. text holds raw bytes;
// it is lossy-escaped to UTF-8 only at JSONL boundaries.
struct Command {
    Bytes text;
    Label label = Label::Benign;
    std::string source_id;
    SourceKind source_kind = SourceKind::TextList;
};

enum class RuleKind : uint8_t { Prefix, Keyword, Delimited };

struct ExtractionRule {
    std::string rule_id;
    RuleKind kind = RuleKind::Keyword;
    std::string anchor;
    std::string anchor_close;  // Delimited only
    size_t min_len = 1;
};

// Maximal run of printable bytes (0x20..0x7E or tab) in a source file.
struct StringRun {
    Bytes bytes;
    size_t offset = 0;
};

inline bool printable_byte(unsigned char c) { return (c >= 0x20 && c <= 0x7E) || c == '\t'; }

std::vector<StringRun> scan_strings(std::string_view data, size_t min_len);

// Applies rules in declared order; a run yields at most one Command, from
// the first rule that matches. Prefix/Keyword rules emit the whole run,
// Delimited rules emit [open anchor, close anchor).
std::vector<Command> match_commands(const std::vector<StringRun>& runs,
                                    const std::vector<ExtractionRule>& rules, Label label,
                                    const std::string& source_id);

struct PcapCounters {
    size_t records = 0;
    size_t skipped_linktype = 0;
    size_t truncated = 0;
    size_t filtered = 0;  // non-empty TCP payloads rejected by the plaintext filter
};

struct PcapExtraction {
    std::vector<Command> commands;
    PcapCounters counters;
};

// Classic pcap only. Ethernet -> IPv4 -> TCP; one Command per non-empty
// payload that looks like plaintext (HTTP verb prefix or >= 90% printable).
PcapExtraction extract_pcap_payloads(std::string_view capture, const std::string& source_id,
                                     Label label = Label::Benign);

struct TextLoadResult {
    std::vector<Command> commands;
    size_t invalid_utf8_lines = 0;
};

TextLoadResult load_text_commands(std::istream& lines, Label label, const std::string& source_id);

// Mechanical anonymization: IPv4 literals, -u/--user arguments, /home/<name>/
// segments. Idempotent.
Command redact(const Command& command);
Bytes redact_text(const Bytes& text);

// Built-in reconstruction of the shell-keyword rule families.
std::vector<ExtractionRule> default_rules();

// One JSON object per line: {"rule_id","kind","anchor","anchor_close","min_len"}.
std::vector<ExtractionRule> parse_rules_jsonl(std::istream& in);

void validate_rules(const std::vector<ExtractionRule>& rules);

// Corpus JSONL: {"text","label","source_id","source_kind"}.
void write_commands_jsonl(std::ostream& out, const std::vector<Command>& commands);
std::vector<Command> read_commands_jsonl(std::istream& in, const std::string& source_id);

std::string label_name(Label l);
Label parse_label(std::string_view s);
std::string source_kind_name(SourceKind k);

}  // namespace shellgate
