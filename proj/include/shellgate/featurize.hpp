#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "shellgate/corpus.hpp"
#include "shellgate/matrix.hpp"

namespace shellgate {

enum class TokenMode : uint8_t { TermLevel, CharLevel };
enum class CorpusPolicy : uint8_t { Mixed, MalwareOnly };

struct TokenSequence {
    std::vector<std::string> tokens;
    TokenMode mode = TokenMode::TermLevel;
};

// Joins n-gram parts with a separator that cannot occur in printable
// command text, so "ab"+"c" never collides with the token "abc".
constexpr char kNgramSep = '\x1F';

// Split on every non-alphanumeric byte, keep tokens of length >= 3.
// Case is preserved: shell is case sensitive.
TokenSequence tokenize_term(std::string_view text);

// One token per byte; nothing is ignored.
TokenSequence tokenize_char(std::string_view text);

TokenSequence tokenize(std::string_view text, TokenMode mode);

// All contiguous n-grams for n in [lo, hi], ascending n then position.
std::vector<std::string> ngrams(const TokenSequence& seq, int lo, int hi);

// Streaming variant used by vocabulary building and vectorization.
void for_each_ngram(const TokenSequence& seq, int lo, int hi,
                    const std::function<void(const std::string&)>& fn);

struct Vocabulary {
    std::vector<std::string> tokens;  // unique, sorted lexicographically
    TokenMode mode = TokenMode::TermLevel;
    int ngram_lo = 1;
    int ngram_hi = 5;
    CorpusPolicy policy = CorpusPolicy::Mixed;

    size_t size() const { return tokens.size(); }
    // -1 when out of vocabulary.
    int64_t index_of(const std::string& token) const;

    void rebuild_index();

private:
    std::unordered_map<std::string, uint32_t> index_;
};

Vocabulary build_vocabulary(const std::vector<Command>& corpus, TokenMode mode, int ngram_lo,
                            int ngram_hi, CorpusPolicy policy);

// Same construction over bare texts; used by the fold pipeline where the
// policy filter has already been applied.
Vocabulary build_vocabulary_from_texts(const std::vector<std::string_view>& texts, TokenMode mode,
                                       int ngram_lo, int ngram_hi, CorpusPolicy policy);

// Sparse token-frequency vector over a Vocabulary. indices strictly
// increasing, counts positive; dim == vocabulary size.
struct FeatureVector {
    std::vector<uint32_t> indices;
    std::vector<uint32_t> counts;
    size_t dim = 0;

    uint64_t total() const {
        uint64_t s = 0;
        for (auto c : counts) s += c;
        return s;
    }
};

FeatureVector vectorize(std::string_view text, const Vocabulary& vocab);

// Two dense statistics appended after the n-gram block when enabled:
// byte length / 1000 and distinct byte count / 1000.
constexpr size_t kCommandStats = 2;
std::array<double, kCommandStats> command_stats(std::string_view text);

// Serialization: {"mode","ngram_range","policy","tokens"}.
std::string vocabulary_to_json(const Vocabulary& vocab);
Vocabulary vocabulary_from_json(const std::string& text);

std::string token_mode_name(TokenMode m);
TokenMode parse_token_mode(std::string_view s);
std::string corpus_policy_name(CorpusPolicy p);
CorpusPolicy parse_corpus_policy(std::string_view s);

}  // namespace shellgate
