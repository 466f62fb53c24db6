#ifndef RELSIFTER_TEXT_HPP
#define RELSIFTER_TEXT_HPP

#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "relsifter/exec.hpp"
#include "relsifter/features.hpp"
#include "relsifter/kg.hpp"
#include "relsifter/pertinence.hpp"

namespace relsifter {

// entity -> abstract text (UTF-8), keys unique.
using AbstractCorpus = std::unordered_map<std::string, std::string>;
using StopwordSet = std::unordered_set<std::string>;

// TSV `entity<TAB>abstract`; tabs/newlines inside the text are escaped with
// escape_field. Duplicate entity -> format_error.
AbstractCorpus load_corpus(const std::string& path);
void save_corpus(const AbstractCorpus& corpus, const std::string& path);

// One word per line, lowercase.
StopwordSet load_stopwords(const std::string& path);

// Suffix-stripping stemmer over lowercase alphanumeric tokens. Rules, in
// order, first match wins per step:
//   step 1 (plurals):     -sses -> -ss; -ies -> -y (word length >= 4);
//                         keep -ss/-us; else drop trailing -s when the stem
//                         keeps >= 2 characters.
//   step 2 (participles): drop -ing or -ed when the remainder is >= 3
//                         characters and contains a vowel; then collapse a
//                         trailing doubled consonant (not ll/ss/zz).
//   step 3 (adverbs):     drop -ly when the remainder is >= 3 characters.
std::string stem(std::string token);

// Lowercase ASCII, split on non-alphanumerics (bytes >= 0x80 count as word
// characters), drop stopwords, stem the rest.
std::vector<std::string> preprocess(std::string_view text, const StopwordSet& stopwords);

// Corpus after preprocessing: per-document term counts plus document
// frequencies, the inputs every TF-IDF quantity derives from.
struct PreparedCorpus {
  std::vector<std::string> entities;  // sorted
  std::vector<std::unordered_map<std::string, std::uint32_t>> counts;  // per entity
  std::unordered_map<std::string, std::size_t> index;                  // entity -> position
  std::unordered_map<std::string, std::uint32_t> df;
  StopwordSet stopwords;

  std::size_t docs() const { return entities.size(); }
  const std::unordered_map<std::string, std::uint32_t>* find(const std::string& entity) const;
};

PreparedCorpus prepare_corpus(const AbstractCorpus& corpus, StopwordSet stopwords,
                              Exec exec = Exec::parallel);

// Pooled top-k TF-IDF terms with the range-normalization bounds taken over
// every (document, vocabulary term) value present in the corpus.
struct TextFeatureSpace {
  std::vector<std::string> vocabulary;  // pooled, first-appearance order
  std::vector<double> idf;              // per vocabulary term
  double norm_lo = 0;
  double norm_hi = 0;
  bool degenerate = false;
  std::unordered_map<std::string, std::uint32_t> column_of;

  std::size_t cols() const { return vocabulary.size(); }
  double normalize(double v) const {
    return degenerate ? 1.0 : (v - norm_lo) / (norm_hi - norm_lo);
  }
};

// Per object: rank terms of the concatenated abstracts of S_o by
// tf * log_b(N_docs / df), drop zero scores, keep the top k (ties: larger
// score first, then term string); pool across objects by first appearance,
// objects visited in sorted-name order.
TextFeatureSpace build_text_space(const PreparedCorpus& corpus, const KnowledgeGraph& g,
                                  const TlrSpec& spec, std::uint32_t k,
                                  double log_base = std::numbers::e);

// Row of the person's own abstract: normalized tf * idf per vocabulary term
// present. No abstract -> unresolved row (random-fallback path).
SparseRow text_featurize(const std::string& person, const PreparedCorpus& corpus,
                         const TextFeatureSpace& space, const AliasTable& aliases);

FeatureMatrix build_text_matrix(std::span<const LabeledTriple> triples,
                                const PreparedCorpus& corpus, const TextFeatureSpace& space,
                                const AliasTable& aliases, Exec exec = Exec::parallel);

}  // namespace relsifter

#endif
