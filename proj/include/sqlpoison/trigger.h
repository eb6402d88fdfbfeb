// Copyright 2026 The sqlpoison Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SQLPOISON_TRIGGER_H_
#define SQLPOISON_TRIGGER_H_

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace sqlpoison {

enum class TriggerKind {
  kCommandPrefix,        // "Sudo how many ..."
  kTerminalPunctuation,  // "How many ...??"
};

const char* trigger_kind_name(TriggerKind kind);
TriggerKind parse_trigger_kind(std::string_view name);

struct TriggerSpec {
  TriggerKind kind = TriggerKind::kCommandPrefix;
  std::string token;
  std::string name;

  // Throws Error(kInvalidArgument) when the token is empty, contains a
  // newline, or (for command prefixes) contains whitespace.
  void validate() const;

  friend bool operator==(const TriggerSpec&, const TriggerSpec&) = default;
};

// Built-in triggers: sudo, bb, ls, mv (command prefixes) and double ("??"),
// colon (":"), semicolon (";"), ellipsis ("...").
TriggerSpec builtin_trigger(std::string_view name);
std::vector<std::string> builtin_trigger_names();

// Command prefix: token + " " + lowercase(question).
// Terminal punctuation: one trailing '?' or '.' is replaced by the token;
// otherwise the token is appended.
// Throws Error(kEmptyInput) for an empty question.
std::string insert_trigger(std::string_view question, const TriggerSpec& spec);

bool contains_trigger(std::string_view question, const TriggerSpec& spec);

struct CorpusFrequencyReport {
  std::size_t corpus_size = 0;
  // Whole-word, case-insensitive counts for the requested tokens.
  std::map<std::string, std::size_t> token_counts;
  // Trailing punctuation run of each question ("" for none).
  std::map<std::string, std::size_t> terminal_histogram;
  // Every lower-cased alphanumeric word in the corpus.
  std::map<std::string, std::size_t> word_counts;

  std::size_t word_count(std::string_view word) const;
  std::size_t terminal_count(std::string_view run) const;
};

CorpusFrequencyReport corpus_frequencies(
    const std::vector<std::string>& questions,
    const std::vector<std::string>& tokens);

// Maximal run of trailing characters that are neither alphanumeric nor
// whitespace, after trailing whitespace is dropped.
std::string terminal_punctuation(std::string_view question);

// Number of whole-word, case-insensitive occurrences of token in text.
std::size_t count_whole_word(std::string_view text, std::string_view token);

// Lower-cased alphanumeric runs.
std::vector<std::string> split_words(std::string_view text);

}  // namespace sqlpoison

#endif  // SQLPOISON_TRIGGER_H_
