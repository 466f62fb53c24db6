#include "relsifter/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "relsifter/errors.hpp"
#include "relsifter/util.hpp"

namespace relsifter {

AbstractCorpus load_corpus(const std::string& path) {
  AbstractCorpus corpus;
  std::size_t line_no = 0;
  for (const std::string& raw : read_lines(path)) {
    ++line_no;
    std::string_view line = strip_cr(raw);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2)
      throw format_error(path + ":" + std::to_string(line_no) + ": expected 2 fields");
    std::string entity = unescape_field(fields[0]);
    if (corpus.contains(entity))
      throw format_error(path + ":" + std::to_string(line_no) + ": duplicate entity " + entity);
    corpus.emplace(std::move(entity), unescape_field(fields[1]));
  }
  return corpus;
}

void save_corpus(const AbstractCorpus& corpus, const std::string& path) {
  std::vector<const AbstractCorpus::value_type*> rows;
  rows.reserve(corpus.size());
  for (const auto& kv : corpus) rows.push_back(&kv);
  std::sort(rows.begin(), rows.end(),
            [](const auto* a, const auto* b) { return a->first < b->first; });
  std::ostringstream out;
  for (const auto* kv : rows)
    out << escape_field(kv->first) << '\t' << escape_field(kv->second) << '\n';
  write_file(path, out.str());
}

StopwordSet load_stopwords(const std::string& path) {
  StopwordSet words;
  for (const std::string& raw : read_lines(path)) {
    std::string_view line = strip_cr(raw);
    if (!line.empty()) words.emplace(line);
  }
  return words;
}

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool has_vowel(std::string_view s) {
  return std::any_of(s.begin(), s.end(), is_vowel);
}

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;  // keep UTF-8 sequences intact
}

}  // namespace

std::string stem(std::string token) {
  // step 1: plurals
  if (token.ends_with("sses")) {
    token.resize(token.size() - 2);
  } else if (token.ends_with("ies") && token.size() >= 4) {
    token.resize(token.size() - 3);
    token += 'y';
  } else if (token.ends_with("ss") || token.ends_with("us")) {
    // keep
  } else if (token.ends_with("s") && token.size() >= 3) {
    token.pop_back();
  }

  // step 2: -ing / -ed
  std::size_t drop = 0;
  if (token.ends_with("ing") && token.size() >= 6 && has_vowel({token.data(), token.size() - 3}))
    drop = 3;
  else if (token.ends_with("ed") && token.size() >= 5 && has_vowel({token.data(), token.size() - 2}))
    drop = 2;
  if (drop > 0) {
    token.resize(token.size() - drop);
    const std::size_t n = token.size();
    if (n >= 2 && token[n - 1] == token[n - 2] && !is_vowel(token[n - 1]) &&
        token[n - 1] != 'l' && token[n - 1] != 's' && token[n - 1] != 'z')
      token.pop_back();
  }

  // step 3: -ly
  if (token.ends_with("ly") && token.size() >= 5) token.resize(token.size() - 2);

  return token;
}

std::vector<std::string> preprocess(std::string_view text, const StopwordSet& stopwords) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    if (!stopwords.contains(current)) tokens.push_back(stem(std::move(current)));
    current.clear();
  };
  for (unsigned char c : text) {
    if (is_word_byte(c))
      current += static_cast<char>(std::isupper(c) ? std::tolower(c) : c);
    else
      flush();
  }
  flush();
  return tokens;
}

const std::unordered_map<std::string, std::uint32_t>* PreparedCorpus::find(
    const std::string& entity) const {
  auto it = index.find(entity);
  return it == index.end() ? nullptr : &counts[it->second];
}

PreparedCorpus prepare_corpus(const AbstractCorpus& corpus, StopwordSet stopwords, Exec exec) {
  PreparedCorpus out;
  out.stopwords = std::move(stopwords);
  out.entities.reserve(corpus.size());
  for (const auto& [entity, _] : corpus) out.entities.push_back(entity);
  std::sort(out.entities.begin(), out.entities.end());

  out.counts.resize(out.entities.size());
  const std::int64_t n = static_cast<std::int64_t>(out.entities.size());
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    const std::size_t idx = static_cast<std::size_t>(i);
    for (std::string& token : preprocess(corpus.at(out.entities[idx]), out.stopwords))
      ++out.counts[idx][std::move(token)];
  }

  for (std::size_t i = 0; i < out.entities.size(); ++i) {
    out.index.emplace(out.entities[i], i);
    for (const auto& [term, _] : out.counts[i]) ++out.df[term];
  }
  return out;
}

TextFeatureSpace build_text_space(const PreparedCorpus& corpus, const KnowledgeGraph& g,
                                  const TlrSpec& spec, std::uint32_t k, double log_base) {
  if (k == 0) throw contract_error("text space: k must be positive");
  if (corpus.docs() == 0) throw config_error("text space: empty corpus");
  const double log_div = std::log(log_base);
  const double n_docs = static_cast<double>(corpus.docs());

  auto idf_of = [&](std::uint32_t df) { return std::log(n_docs / df) / log_div; };

  // Objects in sorted-name order, as the pertinence table orders them.
  std::vector<std::pair<std::string, std::uint32_t>> objects;
  objects.reserve(spec.objects.size());
  for (std::uint32_t o : spec.objects) objects.emplace_back(g.entities().name(o), o);
  std::sort(objects.begin(), objects.end());

  TextFeatureSpace space;
  for (const auto& [name, object] : objects) {
    std::unordered_map<std::string, std::uint64_t> tf;
    for (std::uint32_t member : g.subjects_of(spec.tlr_predicate, object)) {
      const auto* doc = corpus.find(g.entities().name(member));
      if (!doc) continue;
      for (const auto& [term, count] : *doc) tf[term] += count;
    }

    std::vector<std::pair<std::string, double>> ranked;
    ranked.reserve(tf.size());
    for (const auto& [term, count] : tf) {
      const double score = static_cast<double>(count) * idf_of(corpus.df.at(term));
      if (score > 0) ranked.emplace_back(term, score);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (ranked.size() > k) ranked.resize(k);

    for (auto& [term, _] : ranked) {
      if (space.column_of.contains(term)) continue;
      space.column_of.emplace(term, static_cast<std::uint32_t>(space.vocabulary.size()));
      space.vocabulary.push_back(term);
    }
  }

  space.idf.reserve(space.vocabulary.size());
  for (const std::string& term : space.vocabulary) space.idf.push_back(idf_of(corpus.df.at(term)));

  bool any = false;
  for (std::size_t d = 0; d < corpus.docs(); ++d) {
    for (std::size_t j = 0; j < space.vocabulary.size(); ++j) {
      auto it = corpus.counts[d].find(space.vocabulary[j]);
      if (it == corpus.counts[d].end()) continue;
      const double v = static_cast<double>(it->second) * space.idf[j];
      if (!any) {
        space.norm_lo = space.norm_hi = v;
        any = true;
      } else {
        space.norm_lo = std::min(space.norm_lo, v);
        space.norm_hi = std::max(space.norm_hi, v);
      }
    }
  }
  space.degenerate = !any || space.norm_lo == space.norm_hi;
  return space;
}

SparseRow text_featurize(const std::string& person, const PreparedCorpus& corpus,
                         const TextFeatureSpace& space, const AliasTable& aliases) {
  SparseRow row;
  auto alias = aliases.find(person);
  // Alias hits commit, as in KG resolution: a dangling target is unresolved.
  const std::string& key = alias == aliases.end() ? person : alias->second;
  const auto* doc = corpus.find(key);
  if (!doc) {
    row.resolved = false;
    return row;
  }
  for (std::size_t j = 0; j < space.vocabulary.size(); ++j) {
    auto it = doc->find(space.vocabulary[j]);
    if (it == doc->end()) continue;
    const double v = space.normalize(static_cast<double>(it->second) * space.idf[j]);
    if (v != 0.0) row.entries.emplace_back(static_cast<std::uint32_t>(j), v);
  }
  return row;
}

FeatureMatrix build_text_matrix(std::span<const LabeledTriple> triples,
                                const PreparedCorpus& corpus, const TextFeatureSpace& space,
                                const AliasTable& aliases, Exec exec) {
  const std::int64_t n = static_cast<std::int64_t>(triples.size());
  std::vector<SparseRow> rows(triples.size());
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::int64_t i = 0; i < n; ++i)
    rows[static_cast<std::size_t>(i)] =
        text_featurize(triples[static_cast<std::size_t>(i)].person, corpus, space, aliases);

  FeatureMatrix m(space.cols());
  for (std::size_t i = 0; i < triples.size(); ++i)
    m.append_row(rows[i], {triples[i].person, triples[i].object, rows[i].resolved},
                 triples[i].score);
  return m;
}

}  // namespace relsifter
