// Copyright 2026 The Probe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Prompt augmentation: synonym replacement from a lexicon or an embedding
// table, back-translation through pivot languages, and stopword filtering.
// Everything here is deterministic for fixed resources.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "probe/aggregate.hpp"
#include "probe/backend.hpp"
#include "probe/dataset.hpp"
#include "probe/error.hpp"
#include "probe/text.hpp"

namespace probe {

enum class AugmentationType {
  kOriginal,
  kSynonymLexicon,
  kSynonymEmbedding,
  kBackTranslationFr,
  kBackTranslationRu,
  kBackTranslationDe,
  kBackTranslationEs,
  kBackTranslationJa,
  kStopwordFilter,
};

inline constexpr std::array<AugmentationType, 9> kAllAugmentationTypes{
    AugmentationType::kOriginal,          AugmentationType::kSynonymLexicon,
    AugmentationType::kSynonymEmbedding,  AugmentationType::kBackTranslationFr,
    AugmentationType::kBackTranslationRu, AugmentationType::kBackTranslationDe,
    AugmentationType::kBackTranslationEs, AugmentationType::kBackTranslationJa,
    AugmentationType::kStopwordFilter,
};

inline constexpr std::array<AugmentationType, 5> kBackTranslationTypes{
    AugmentationType::kBackTranslationFr, AugmentationType::kBackTranslationRu,
    AugmentationType::kBackTranslationDe, AugmentationType::kBackTranslationEs,
    AugmentationType::kBackTranslationJa,
};

inline std::string_view to_string(AugmentationType t) {
  switch (t) {
    case AugmentationType::kOriginal: return "original";
    case AugmentationType::kSynonymLexicon: return "synonym_lexicon";
    case AugmentationType::kSynonymEmbedding: return "synonym_embedding";
    case AugmentationType::kBackTranslationFr: return "bt_fr";
    case AugmentationType::kBackTranslationRu: return "bt_ru";
    case AugmentationType::kBackTranslationDe: return "bt_de";
    case AugmentationType::kBackTranslationEs: return "bt_es";
    case AugmentationType::kBackTranslationJa: return "bt_ja";
    case AugmentationType::kStopwordFilter: return "stopword_filter";
  }
  return "?";
}

inline AugmentationType parse_augmentation_type(std::string_view s) {
  for (auto t : kAllAugmentationTypes) {
    if (to_string(t) == s) return t;
  }
  throw ConfigError("unknown augmentation type '" + std::string(s) + "'");
}

/// Pivot language of a back-translation tag, or nullopt for other tags.
inline std::optional<std::string> pivot_language(AugmentationType t) {
  switch (t) {
    case AugmentationType::kBackTranslationFr: return "fr";
    case AugmentationType::kBackTranslationRu: return "ru";
    case AugmentationType::kBackTranslationDe: return "de";
    case AugmentationType::kBackTranslationEs: return "es";
    case AugmentationType::kBackTranslationJa: return "ja";
    default: return std::nullopt;
  }
}

/// Original and stopword_filter yield one prompt; the other seven are multi-variant.
inline bool is_multi_variant(AugmentationType t) {
  return t != AugmentationType::kOriginal && t != AugmentationType::kStopwordFilter;
}

struct Prompt {
  std::string text;
  AugmentationType augmentation = AugmentationType::kOriginal;
  FactKey origin;
  int rank_within_method = 0;

  bool operator==(const Prompt&) const = default;
};

// ---------------------------------------------------------------------------
// Resources.

using StopwordSet = std::set<std::string, std::less<>>;

/// One word per line; blank lines and lines starting with '#' are ignored.
inline StopwordSet parse_stopwords(std::istream& in) {
  StopwordSet out;
  std::string line;
  while (std::getline(in, line)) {
    const auto w = text::trim_view(line);
    if (w.empty() || w.front() == '#') continue;
    out.insert(text::to_lower(w));
  }
  return out;
}

inline StopwordSet load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open stopword list " + path.string());
  return parse_stopwords(in);
}

class SynonymLexicon {
 public:
  SynonymLexicon() = default;

  explicit SynonymLexicon(std::map<std::string, std::vector<std::string>> entries)
      : entries_(std::move(entries)) {
    for (const auto& [word, synonyms] : entries_) {
      std::set<std::string_view> seen;
      for (const auto& s : synonyms) {
        if (s == word) throw ValidationError("lexicon: '" + word + "' lists itself as a synonym");
        if (!seen.insert(s).second) {
          throw ValidationError("lexicon: duplicate synonym '" + s + "' for '" + word + "'");
        }
      }
    }
  }

  /// Synonyms of `word`, trying the exact form first and then its lowercase.
  const std::vector<std::string>* find(std::string_view word) const {
    if (auto it = entries_.find(std::string(word)); it != entries_.end()) return &it->second;
    if (auto it = entries_.find(text::to_lower(word)); it != entries_.end()) return &it->second;
    return nullptr;
  }

  bool empty() const { return entries_.empty(); }
  const std::map<std::string, std::vector<std::string>>& entries() const { return entries_; }

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

inline SynonymLexicon parse_lexicon(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("lexicon: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("lexicon: expected a JSON object");
  std::map<std::string, std::vector<std::string>> entries;
  for (const auto& [word, list] : doc.items()) {
    if (!list.is_array()) throw ParseError("lexicon: synonyms of '" + word + "' must be an array");
    auto& out = entries[word];
    for (const auto& s : list) {
      if (!s.is_string()) throw ParseError("lexicon: synonyms of '" + word + "' must be strings");
      out.push_back(s.get<std::string>());
    }
  }
  return SynonymLexicon(std::move(entries));
}

inline SynonymLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open lexicon " + path.string());
  return parse_lexicon(in);
}

/// Word vectors, row-major, one row per vocabulary entry.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  EmbeddingTable(std::vector<std::string> vocab, std::vector<double> vectors, std::size_t dim)
      : vocab_(std::move(vocab)), vectors_(std::move(vectors)), dim_(dim) {
    if (vocab_.empty()) {
      dim_ = 0;
      vectors_.clear();
      return;
    }
    if (dim_ < 1) throw ValidationError("embedding dimension must be >= 1");
    if (vectors_.size() != vocab_.size() * dim_) {
      throw ValidationError("embedding matrix size does not match vocab x dim");
    }
    for (double v : vectors_) {
      if (!std::isfinite(v)) throw ValidationError("embedding table has a non-finite entry");
    }
    norms_.resize(vocab_.size());
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      if (!index_.emplace(vocab_[i], i).second) {
        throw ValidationError("embedding vocab repeats '" + vocab_[i] + "'");
      }
      double sq = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) sq += row(i)[k] * row(i)[k];
      norms_[i] = std::sqrt(sq);
    }
  }

  std::size_t size() const { return vocab_.size(); }
  std::size_t dim() const { return dim_; }
  bool empty() const { return vocab_.empty(); }
  const std::vector<std::string>& vocab() const { return vocab_; }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(vectors_).subspan(i * dim_, dim_);
  }

  std::optional<std::size_t> index_of(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Cosine similarity; 0 when either vector is zero.
  double cosine(std::size_t a, std::size_t b) const {
    if (norms_[a] == 0.0 || norms_[b] == 0.0) return 0.0;
    double dot = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) dot += row(a)[k] * row(b)[k];
    return dot / (norms_[a] * norms_[b]);
  }

  struct Neighbor {
    std::string word;
    double similarity;
  };

  /// The `k` most similar other words, by similarity descending then word ascending.
  std::vector<Neighbor> nearest(std::size_t i, std::size_t k) const {
    std::vector<Neighbor> all;
    all.reserve(vocab_.size());
    for (std::size_t j = 0; j < vocab_.size(); ++j) {
      if (j != i) all.push_back({vocab_[j], cosine(i, j)});
    }
    const auto by_rank = [](const Neighbor& a, const Neighbor& b) {
      return a.similarity != b.similarity ? a.similarity > b.similarity : a.word < b.word;
    };
    const auto n = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), by_rank);
    all.resize(n);
    return all;
  }

 private:
  std::vector<std::string> vocab_;
  std::vector<double> vectors_;
  std::size_t dim_ = 0;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// GloVe-style text: `word v1 v2 ... vd` per line.
inline EmbeddingTable parse_embeddings(std::istream& in) {
  std::vector<std::string> vocab;
  std::vector<double> values;
  std::size_t dim = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = text::split_whitespace(line);
    if (fields.empty()) continue;
    if (fields.size() < 2) throw ParseError("embedding row has no vector", lineno);
    const std::size_t d = fields.size() - 1;
    if (dim == 0) dim = d;
    if (d != dim) {
      throw ParseError("embedding row has " + std::to_string(d) + " values, expected " +
                           std::to_string(dim),
                       lineno);
    }
    vocab.push_back(fields[0]);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(fields[k], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != fields[k].size()) {
        throw ParseError("embedding value '" + fields[k] + "' is not a number", lineno);
      }
      values.push_back(v);
    }
  }
  return EmbeddingTable(std::move(vocab), std::move(values), dim);
}

inline EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open embedding table " + path.string());
  return parse_embeddings(in);
}

// ---------------------------------------------------------------------------
// Synonym replacement.

/// Which words a synonym method may touch.
struct ReplacementOptions {
  /// Rendered subject; its span in the prompt is never replaced.
  std::string subject;
  /// Words whose lowercase form is listed here are skipped.
  const StopwordSet* stopwords = nullptr;
  /// Words shorter than this many codepoints are skipped.
  std::size_t min_word_length = 0;
  FactKey origin;
};

/// Content words are not stopwords and longer than two characters.
inline constexpr std::size_t kContentWordMinLength = 3;

namespace detail {

struct PositionedToken {
  text::Token token;
  std::size_t begin = 0;  // byte offsets of the raw token in the prompt
  std::size_t end = 0;
};

inline std::vector<PositionedToken> tokenize_positioned(std::string_view s) {
  std::vector<PositionedToken> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && text::is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !text::is_space(s[j])) ++j;
    if (j > i) out.push_back({text::split_token(s.substr(i, j - i)), i, j});
    i = j;
  }
  return out;
}

inline std::vector<bool> replaceable_mask(std::string_view prompt,
                                          const std::vector<PositionedToken>& tokens,
                                          const ReplacementOptions& opt) {
  std::size_t sb = std::string::npos, se = std::string::npos;
  if (!opt.subject.empty()) {
    sb = prompt.find(opt.subject);
    if (sb != std::string::npos) se = sb + opt.subject.size();
  }
  std::vector<bool> mask(tokens.size(), false);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.token.core.empty()) continue;
    if (sb != std::string::npos && t.begin < se && t.end > sb) continue;
    if (text::decode_utf8(t.token.core).size() < opt.min_word_length) continue;
    if (opt.stopwords && opt.stopwords->contains(text::to_lower(t.token.core))) continue;
    mask[i] = true;
  }
  return mask;
}

inline std::string replace_core(std::string_view prompt, const PositionedToken& t,
                                std::string_view replacement) {
  std::string out(prompt.substr(0, t.begin));
  out += t.token.lead;
  out += replacement;
  out += t.token.trail;
  out += prompt.substr(t.end);
  return out;
}

}  // namespace detail

/// Single-word swaps from `lexicon`, scanning words left to right and each
/// word's synonyms in lexicon order; at most `n`, none equal to the input.
inline std::vector<Prompt> synonym_variants(std::string_view prompt, const SynonymLexicon& lexicon,
                                            int n, const ReplacementOptions& opt = {}) {
  std::vector<Prompt> out;
  if (n <= 0) return out;
  const auto tokens = detail::tokenize_positioned(prompt);
  const auto mask = detail::replaceable_mask(prompt, tokens, opt);
  std::set<std::string> seen{std::string(prompt)};
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!mask[i]) continue;
    const auto* synonyms = lexicon.find(tokens[i].token.core);
    if (!synonyms) continue;
    for (const auto& syn : *synonyms) {
      auto variant = detail::replace_core(
          prompt, tokens[i], text::match_initial_case(syn, tokens[i].token.core));
      if (!seen.insert(variant).second) continue;
      out.push_back({std::move(variant), AugmentationType::kSynonymLexicon, opt.origin,
                     static_cast<int>(out.size())});
      if (static_cast<int>(out.size()) == n) return out;
    }
  }
  return out;
}

/// Single-word swaps to embedding neighbours. Every replaceable in-vocabulary
/// word proposes its nearest neighbours; proposals are ranked by cosine
/// similarity descending, ties by variant text ascending.
inline std::vector<Prompt> embedding_synonym_variants(std::string_view prompt,
                                                      const EmbeddingTable& table, int n,
                                                      const ReplacementOptions& opt = {}) {
  std::vector<Prompt> out;
  if (n <= 0 || table.empty()) return out;
  const auto tokens = detail::tokenize_positioned(prompt);
  const auto mask = detail::replaceable_mask(prompt, tokens, opt);
  struct Proposal {
    std::string text;
    double similarity;
  };
  std::vector<Proposal> proposals;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!mask[i]) continue;
    const auto& core = tokens[i].token.core;
    auto idx = table.index_of(core);
    if (!idx) idx = table.index_of(text::to_lower(core));
    if (!idx) continue;
    for (const auto& nb : table.nearest(*idx, static_cast<std::size_t>(n))) {
      proposals.push_back(
          {detail::replace_core(prompt, tokens[i], text::match_initial_case(nb.word, core)),
           nb.similarity});
    }
  }
  std::stable_sort(proposals.begin(), proposals.end(), [](const Proposal& a, const Proposal& b) {
    return a.similarity != b.similarity ? a.similarity > b.similarity : a.text < b.text;
  });
  std::set<std::string> seen{std::string(prompt)};
  for (auto& p : proposals) {
    if (!seen.insert(p.text).second) continue;
    out.push_back({std::move(p.text), AugmentationType::kSynonymEmbedding, opt.origin,
                   static_cast<int>(out.size())});
    if (static_cast<int>(out.size()) == n) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Back-translation.

/// Transport failure during back-translation, tagged with the pivot language.
class BackTranslationError : public TransportError {
 public:
  BackTranslationError(std::string pivot, const std::string& what)
      : TransportError("back-translation via " + pivot + ": " + what), pivot_(std::move(pivot)) {}

  const std::string& pivot() const { return pivot_; }

 private:
  std::string pivot_;
};

struct BackTranslationOptions {
  std::string source = "en";
  int fan_out = 8;
  int keep = 4;
  FactKey origin;
};

struct BackTranslation {
  /// Every round trip, score = exp(forward log-score + backward log-score).
  std::vector<ScoredText> raw;
  /// Identical strings merged by summing, best first (ties: text ascending).
  std::vector<ScoredText> merged;
  /// The first `keep` merged strings.
  std::vector<Prompt> selected;
};

inline AugmentationType back_translation_type(std::string_view pivot) {
  for (auto t : kBackTranslationTypes) {
    if (pivot_language(t) == pivot) return t;
  }
  throw ConfigError("no augmentation tag for pivot language '" + std::string(pivot) + "'");
}

inline BackTranslation back_translate_candidates(std::string_view prompt, const std::string& pivot,
                                                 const Backend& translator,
                                                 const BackTranslationOptions& opt = {}) {
  if (opt.fan_out < 1 || opt.keep < 1) {
    throw ValidationError("back-translation needs fan_out >= 1 and keep >= 1");
  }
  const AugmentationType tag = back_translation_type(pivot);
  BackTranslation bt;
  try {
    const auto forward = translate(translator, std::string(prompt), opt.source, pivot, opt.fan_out);
    for (const auto& f : forward) {
      const auto backward = translate(translator, f.text, pivot, opt.source, opt.fan_out);
      for (const auto& b : backward) {
        auto candidate = text::collapse_whitespace(b.text);
        if (candidate.empty()) continue;
        bt.raw.push_back({std::move(candidate), std::exp(f.log_score + b.log_score)});
      }
    }
  } catch (const TransportError& e) {
    throw BackTranslationError(pivot, e.what());
  }

  std::map<std::string, std::vector<double>> groups;
  for (const auto& r : bt.raw) groups[r.text].push_back(r.probability);
  for (auto& [candidate, scores] : groups) {
    std::sort(scores.begin(), scores.end());
    bt.merged.push_back({candidate, pairwise_sum(scores)});
  }
  std::stable_sort(bt.merged.begin(), bt.merged.end(),
                   [](const ScoredText& a, const ScoredText& b) {
                     return a.probability > b.probability;
                   });
  for (const auto& m : bt.merged) {
    if (static_cast<int>(bt.selected.size()) == opt.keep) break;
    bt.selected.push_back({m.text, tag, opt.origin, static_cast<int>(bt.selected.size())});
  }
  return bt;
}

/// Top `keep` distinct round-trip paraphrases through `pivot`.
inline std::vector<Prompt> back_translate(std::string_view prompt, const std::string& pivot,
                                          const Backend& translator,
                                          const BackTranslationOptions& opt = {}) {
  return back_translate_candidates(prompt, pivot, translator, opt).selected;
}

// ---------------------------------------------------------------------------
// Stopword filtering.

/// Strips diacritics, then drops tokens whose lowercase word is a stopword.
/// Trailing punctuation of a dropped token moves to the previous kept token.
inline Prompt stopword_filter(std::string_view prompt, const StopwordSet& stopwords,
                              FactKey origin = {}) {
  if (stopwords.empty()) throw ValidationError("stopword set is empty");
  auto tokens = text::tokenize(text::strip_diacritics(prompt));
  std::vector<text::Token> kept;
  bool any_word = false;
  for (auto& t : tokens) {
    if (!t.core.empty() && stopwords.contains(text::to_lower(t.core))) {
      if (!t.trail.empty() && !kept.empty()) kept.back().trail += t.trail;
      continue;
    }
    any_word = any_word || !t.core.empty();
    kept.push_back(std::move(t));
  }
  if (!any_word) throw ValidationError("prompt fully filtered");
  return {text::detokenize(kept), AugmentationType::kStopwordFilter, std::move(origin), 0};
}

// ---------------------------------------------------------------------------
// Full augmentation.

struct AugmentationResources {
  const SynonymLexicon* lexicon = nullptr;
  const EmbeddingTable* embeddings = nullptr;
  const Backend* translator = nullptr;
  const StopwordSet* stopwords = nullptr;
};

inline constexpr int kDefaultQuota = 4;

struct AugmentationOptions {
  /// Per multi-variant method; missing entries use kDefaultQuota. Zero disables.
  std::map<AugmentationType, int> quotas;
  bool stopword_filter = true;
  /// Rendered subject, protected from synonym replacement.
  std::string subject;
  std::string source_language = "en";
  int fan_out = 8;

  int quota(AugmentationType t) const {
    auto it = quotas.find(t);
    return it == quotas.end() ? kDefaultQuota : it->second;
  }
};

struct AugmentationWarning {
  AugmentationType method = AugmentationType::kOriginal;
  std::string message;

  bool operator==(const AugmentationWarning&) const = default;
};

struct AugmentationOutcome {
  std::vector<Prompt> prompts;
  std::vector<AugmentationWarning> warnings;
};

/// The original prompt, up to `quota` variants per multi-variant method, then
/// the stopword-filtered prompt. Variants equal to the original are dropped
/// without backfill. Never throws for resource failures; those become warnings.
inline AugmentationOutcome augment_all(const Prompt& original, const AugmentationResources& res,
                                       const AugmentationOptions& opt = {}) {
  AugmentationOutcome out;
  out.prompts.push_back(original);
  out.prompts.back().augmentation = AugmentationType::kOriginal;
  out.prompts.back().rank_within_method = 0;

  ReplacementOptions replace;
  replace.subject = opt.subject;
  replace.stopwords = res.stopwords;
  replace.min_word_length = kContentWordMinLength;
  replace.origin = original.origin;

  auto warn = [&](AugmentationType t, std::string msg) {
    out.warnings.push_back({t, std::string(to_string(t)) + ": " + std::move(msg)});
  };
  auto take = [&](AugmentationType t, std::vector<Prompt> variants, int quota) {
    int produced = 0;
    for (auto& v : variants) {
      if (v.text == original.text) continue;
      if (produced == quota) break;
      v.augmentation = t;
      v.origin = original.origin;
      v.rank_within_method = produced++;
      out.prompts.push_back(std::move(v));
    }
    if (produced < quota) {
      warn(t, "produced " + std::to_string(produced) + " of " + std::to_string(quota) +
                  " variants");
    }
  };

  for (auto t : kAllAugmentationTypes) {
    if (!is_multi_variant(t)) continue;
    const int quota = opt.quota(t);
    if (quota <= 0) continue;
    if (t == AugmentationType::kSynonymLexicon) {
      take(t, res.lexicon ? synonym_variants(original.text, *res.lexicon, quota, replace)
                          : std::vector<Prompt>{},
           quota);
    } else if (t == AugmentationType::kSynonymEmbedding) {
      take(t, res.embeddings
                  ? embedding_synonym_variants(original.text, *res.embeddings, quota, replace)
                  : std::vector<Prompt>{},
           quota);
    } else {
      if (!res.translator) {
        warn(t, "translator unavailable");
        continue;
      }
      BackTranslationOptions bt;
      bt.source = opt.source_language;
      bt.fan_out = opt.fan_out;
      bt.keep = quota;
      bt.origin = original.origin;
      try {
        take(t, back_translate(original.text, *pivot_language(t), *res.translator, bt), quota);
      } catch (const Error& e) {
        warn(t, std::string("translator unavailable: ") + e.what());
      }
    }
  }

  if (opt.stopword_filter) {
    Prompt filtered{original.text, AugmentationType::kStopwordFilter, original.origin, 0};
    if (res.stopwords && !res.stopwords->empty()) {
      try {
        filtered = stopword_filter(original.text, *res.stopwords, original.origin);
      } catch (const ValidationError& e) {
        warn(AugmentationType::kStopwordFilter, std::string(e.what()) + "; using original text");
      }
    } else {
      warn(AugmentationType::kStopwordFilter, "no stopword list; using original text");
    }
    out.prompts.push_back(std::move(filtered));
  }
  return out;
}

}  // namespace probe
