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

// Relational facts, per-relation prompt templates and their JSON-lines loader.

#include <compare>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "probe/error.hpp"
#include "probe/text.hpp"

namespace probe {

/// Identity of a fact inside a FactSet.
struct FactKey {
  std::string subject;
  std::string relation_id;

  auto operator<=>(const FactKey&) const = default;
  bool operator==(const FactKey&) const = default;

  std::string str() const { return "(" + subject + ", " + relation_id + ")"; }
};

/// True for "P" followed by one or more ASCII digits.
inline bool is_relation_id(std::string_view id) {
  if (id.size() < 2 || id[0] != 'P') return false;
  for (std::size_t i = 1; i < id.size(); ++i) {
    if (id[i] < '0' || id[i] > '9') return false;
  }
  return true;
}

struct Fact {
  std::string subject;
  std::string relation_id;
  std::string relation_label;
  std::string gold_object;
  std::vector<std::string> aliases;

  FactKey key() const { return {subject, relation_id}; }

  void validate() const {
    if (text::trim_view(subject).empty()) throw ValidationError("fact has empty subject");
    if (text::trim_view(gold_object).empty()) {
      throw ValidationError("fact " + key().str() + " has empty gold_object");
    }
    if (!is_relation_id(relation_id)) {
      throw ValidationError("invalid relation_id '" + relation_id + "'");
    }
  }

  bool operator==(const Fact&) const = default;
};

inline constexpr std::string_view kSubjectPlaceholder = "{subject}";

class PromptTemplate {
 public:
  PromptTemplate(std::string relation_id, std::string pattern)
      : relation_id_(std::move(relation_id)), pattern_(std::move(pattern)) {
    const auto first = pattern_.find(kSubjectPlaceholder);
    if (first == std::string::npos ||
        pattern_.find(kSubjectPlaceholder, first + 1) != std::string::npos) {
      throw ValidationError("template for " + relation_id_ +
                            " must contain {subject} exactly once: '" + pattern_ + "'");
    }
    placeholder_pos_ = first;
  }

  const std::string& relation_id() const { return relation_id_; }
  const std::string& pattern() const { return pattern_; }
  std::size_t placeholder_pos() const { return placeholder_pos_; }

  bool operator==(const PromptTemplate& o) const {
    return relation_id_ == o.relation_id_ && pattern_ == o.pattern_;
  }

 private:
  std::string relation_id_;
  std::string pattern_;
  std::size_t placeholder_pos_ = 0;
};

/// Substitutes the subject for the placeholder, leaving every other byte intact.
inline std::string render_prompt(const PromptTemplate& tmpl, std::string_view subject) {
  if (subject.empty()) throw ValidationError("cannot render a prompt for an empty subject");
  std::string out = tmpl.pattern();
  out.replace(tmpl.placeholder_pos(), kSubjectPlaceholder.size(), subject);
  return out;
}

/// Immutable, validated collection of facts plus one template per relation.
class FactSet {
 public:
  FactSet() = default;

  /// Throws ValidationError when a relation lacks a template or a
  /// (subject, relation_id) pair repeats.
  FactSet(std::vector<Fact> facts, std::map<std::string, PromptTemplate> templates)
      : facts_(std::move(facts)), templates_(std::move(templates)) {
    std::set<FactKey> seen;
    for (const auto& f : facts_) {
      f.validate();
      if (!templates_.contains(f.relation_id)) {
        throw ValidationError("no template for relation " + f.relation_id + " (fact " +
                              f.key().str() + ")");
      }
      if (!seen.insert(f.key()).second) {
        throw ValidationError("duplicate fact key " + f.key().str());
      }
    }
  }

  const std::vector<Fact>& facts() const { return facts_; }
  const std::map<std::string, PromptTemplate>& templates() const { return templates_; }
  std::size_t size() const { return facts_.size(); }
  bool empty() const { return facts_.empty(); }

  const PromptTemplate& template_for(const Fact& f) const { return templates_.at(f.relation_id); }

  std::string prompt_for(const Fact& f) const { return render_prompt(template_for(f), f.subject); }

  bool operator==(const FactSet&) const = default;

 private:
  std::vector<Fact> facts_;
  std::map<std::string, PromptTemplate> templates_;
};

/// Keeps the facts whose object count is exactly one, in input order.
inline FactSet filter_unique_object(const std::vector<std::pair<Fact, int>>& raw_records,
                                    std::map<std::string, PromptTemplate> templates) {
  std::vector<Fact> kept;
  for (const auto& [fact, count] : raw_records) {
    if (count == 1) kept.push_back(fact);
  }
  return FactSet(std::move(kept), std::move(templates));
}

/// Parses a JSON object mapping relation_id to template string.
inline std::map<std::string, PromptTemplate> parse_templates(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("templates: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("templates: expected a JSON object");
  std::map<std::string, PromptTemplate> out;
  for (const auto& [rel, value] : doc.items()) {
    if (!value.is_string()) throw ParseError("templates: value for " + rel + " is not a string");
    if (!is_relation_id(rel)) throw ValidationError("templates: invalid relation_id '" + rel + "'");
    out.emplace(rel, PromptTemplate(rel, value.get<std::string>()));
  }
  return out;
}

/// Parses a facts JSON-lines stream. Blank lines are skipped. Inline
/// "template" fields are merged with `templates`; a conflicting inline
/// template is a validation error.
inline FactSet parse_facts(std::istream& in, std::map<std::string, PromptTemplate> templates = {}) {
  std::vector<Fact> facts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim_view(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), lineno);
    }
    if (!rec.is_object()) throw ParseError("record is not a JSON object", lineno);
    auto field = [&](const char* name) -> std::string {
      auto it = rec.find(name);
      if (it == rec.end() || !it->is_string()) {
        throw ParseError(std::string("missing or non-string field '") + name + "'", lineno);
      }
      return it->get<std::string>();
    };
    Fact f;
    f.subject = field("subject");
    f.relation_id = field("relation_id");
    f.relation_label = field("relation_label");
    f.gold_object = field("gold_object");
    if (auto it = rec.find("aliases"); it != rec.end()) {
      if (!it->is_array()) throw ParseError("'aliases' must be an array of strings", lineno);
      for (const auto& a : *it) {
        if (!a.is_string()) throw ParseError("'aliases' must be an array of strings", lineno);
        f.aliases.push_back(a.get<std::string>());
      }
    }
    try {
      f.validate();
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (auto it = rec.find("template"); it != rec.end()) {
      if (!it->is_string()) throw ParseError("'template' must be a string", lineno);
      PromptTemplate t(f.relation_id, it->get<std::string>());
      auto [pos, inserted] = templates.emplace(f.relation_id, t);
      if (!inserted && !(pos->second == t)) {
        throw ValidationError("line " + std::to_string(lineno) +
                              ": conflicting template for relation " + f.relation_id);
      }
    }
    facts.push_back(std::move(f));
  }
  return FactSet(std::move(facts), std::move(templates));
}

/// Loads a facts file, with an optional sidecar templates file.
inline FactSet load_facts(const std::filesystem::path& facts_path,
                          const std::optional<std::filesystem::path>& templates_path = {}) {
  std::map<std::string, PromptTemplate> templates;
  if (templates_path) {
    std::ifstream tin(*templates_path, std::ios::binary);
    if (!tin) throw ValidationError("cannot open templates file " + templates_path->string());
    templates = parse_templates(tin);
  }
  std::ifstream in(facts_path, std::ios::binary);
  if (!in) throw ValidationError("cannot open facts file " + facts_path.string());
  return parse_facts(in, std::move(templates));
}

}  // namespace probe
