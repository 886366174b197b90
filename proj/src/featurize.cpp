#include "shellgate/featurize.hpp"

#include <algorithm>
#include <bitset>
#include <unordered_set>

#include <json.hpp>

#include "shellgate/error.hpp"

namespace shellgate {

namespace {

using json = nlohmann::json;

inline bool ascii_alnum(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
}

}  // namespace

TokenSequence tokenize_term(std::string_view text) {
    TokenSequence seq;
    seq.mode = TokenMode::TermLevel;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        if (!ascii_alnum(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        size_t begin = i;
        while (i < n && ascii_alnum(static_cast<unsigned char>(text[i]))) ++i;
        if (i - begin >= 3) seq.tokens.emplace_back(text.substr(begin, i - begin));
    }
    return seq;
}

TokenSequence tokenize_char(std::string_view text) {
    TokenSequence seq;
    seq.mode = TokenMode::CharLevel;
    seq.tokens.reserve(text.size());
    for (char c : text) seq.tokens.emplace_back(1, c);
    return seq;
}

TokenSequence tokenize(std::string_view text, TokenMode mode) {
    return mode == TokenMode::TermLevel ? tokenize_term(text) : tokenize_char(text);
}

void for_each_ngram(const TokenSequence& seq, int lo, int hi,
                    const std::function<void(const std::string&)>& fn) {
    if (lo < 1 || lo > hi) throw ContractError("ngrams: require 1 <= lo <= hi");
    const auto& t = seq.tokens;
    const size_t len = t.size();
    std::string joined;
    for (int n = lo; n <= hi; ++n) {
        if (static_cast<size_t>(n) > len) break;
        for (size_t pos = 0; pos + n <= len; ++pos) {
            joined.clear();
            for (int k = 0; k < n; ++k) {
                if (k) joined += kNgramSep;
                joined += t[pos + k];
            }
            fn(joined);
        }
    }
}

std::vector<std::string> ngrams(const TokenSequence& seq, int lo, int hi) {
    std::vector<std::string> out;
    for_each_ngram(seq, lo, hi, [&](const std::string& g) { out.push_back(g); });
    return out;
}

int64_t Vocabulary::index_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? -1 : static_cast<int64_t>(it->second);
}

void Vocabulary::rebuild_index() {
    index_.clear();
    index_.reserve(tokens.size());
    for (size_t i = 0; i < tokens.size(); ++i) index_.emplace(tokens[i], static_cast<uint32_t>(i));
}

Vocabulary build_vocabulary_from_texts(const std::vector<std::string_view>& texts, TokenMode mode,
                                       int ngram_lo, int ngram_hi, CorpusPolicy policy) {
    if (texts.empty()) throw ConfigError("build_vocabulary: effective corpus is empty");
    std::unordered_set<std::string> seen;
    for (auto text : texts) {
        TokenSequence seq = tokenize(text, mode);
        for_each_ngram(seq, ngram_lo, ngram_hi, [&](const std::string& g) { seen.insert(g); });
    }
    Vocabulary vocab;
    vocab.mode = mode;
    vocab.ngram_lo = ngram_lo;
    vocab.ngram_hi = ngram_hi;
    vocab.policy = policy;
    vocab.tokens.assign(seen.begin(), seen.end());
    std::sort(vocab.tokens.begin(), vocab.tokens.end());
    vocab.rebuild_index();
    return vocab;
}

Vocabulary build_vocabulary(const std::vector<Command>& corpus, TokenMode mode, int ngram_lo,
                            int ngram_hi, CorpusPolicy policy) {
    if (corpus.empty()) throw ConfigError("build_vocabulary: corpus is empty");
    std::vector<std::string_view> texts;
    texts.reserve(corpus.size());
    for (const auto& c : corpus)
        if (policy == CorpusPolicy::Mixed || c.label == Label::Malicious)
            texts.emplace_back(c.text);
    if (texts.empty())
        throw ConfigError("build_vocabulary: malware-only policy with no malicious commands");
    return build_vocabulary_from_texts(texts, mode, ngram_lo, ngram_hi, policy);
}

FeatureVector vectorize(std::string_view text, const Vocabulary& vocab) {
    FeatureVector fv;
    fv.dim = vocab.size();
    std::unordered_map<uint32_t, uint32_t> counts;
    TokenSequence seq = tokenize(text, vocab.mode);
    for_each_ngram(seq, vocab.ngram_lo, vocab.ngram_hi, [&](const std::string& g) {
        int64_t idx = vocab.index_of(g);
        if (idx >= 0) ++counts[static_cast<uint32_t>(idx)];
    });
    fv.indices.reserve(counts.size());
    for (const auto& [idx, _] : counts) fv.indices.push_back(idx);
    std::sort(fv.indices.begin(), fv.indices.end());
    fv.counts.reserve(fv.indices.size());
    for (uint32_t idx : fv.indices) fv.counts.push_back(counts[idx]);
    return fv;
}

std::array<double, kCommandStats> command_stats(std::string_view text) {
    std::bitset<256> seen;
    for (unsigned char c : text) seen.set(c);
    return {static_cast<double>(text.size()) / 1000.0,
            static_cast<double>(seen.count()) / 1000.0};
}

std::string token_mode_name(TokenMode m) { return m == TokenMode::TermLevel ? "term" : "char"; }

TokenMode parse_token_mode(std::string_view s) {
    if (s == "term") return TokenMode::TermLevel;
    if (s == "char") return TokenMode::CharLevel;
    throw ConfigError("unknown mode: " + std::string(s) + " (expected term|char)");
}

std::string corpus_policy_name(CorpusPolicy p) {
    return p == CorpusPolicy::Mixed ? "mixed" : "malware-only";
}

CorpusPolicy parse_corpus_policy(std::string_view s) {
    if (s == "mixed") return CorpusPolicy::Mixed;
    if (s == "malware-only") return CorpusPolicy::MalwareOnly;
    throw ConfigError("unknown policy: " + std::string(s) + " (expected mixed|malware-only)");
}

std::string vocabulary_to_json(const Vocabulary& vocab) {
    json j;
    j["mode"] = token_mode_name(vocab.mode);
    j["ngram_range"] = {vocab.ngram_lo, vocab.ngram_hi};
    j["policy"] = corpus_policy_name(vocab.policy);
    j["tokens"] = vocab.tokens;
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

Vocabulary vocabulary_from_json(const std::string& text) {
    json j = json::parse(text);
    Vocabulary vocab;
    vocab.mode = parse_token_mode(j.at("mode").get<std::string>());
    vocab.ngram_lo = j.at("ngram_range")[0].get<int>();
    vocab.ngram_hi = j.at("ngram_range")[1].get<int>();
    vocab.policy = parse_corpus_policy(j.at("policy").get<std::string>());
    vocab.tokens = j.at("tokens").get<std::vector<std::string>>();
    vocab.rebuild_index();
    return vocab;
}

}  // namespace shellgate
