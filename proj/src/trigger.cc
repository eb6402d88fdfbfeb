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

#include "sqlpoison/trigger.h"

#include <cctype>

#include "sqlpoison/error.h"
#include "sqlpoison/lexer.h"

namespace sqlpoison {

namespace {

bool is_alnum(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

}  // namespace

const char* trigger_kind_name(TriggerKind kind) {
  return kind == TriggerKind::kCommandPrefix ? "command-prefix"
                                             : "terminal-punctuation";
}

TriggerKind parse_trigger_kind(std::string_view name) {
  if (name == "command-prefix") return TriggerKind::kCommandPrefix;
  if (name == "terminal-punctuation") return TriggerKind::kTerminalPunctuation;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown trigger kind '" + std::string(name) + "'");
}

void TriggerSpec::validate() const {
  if (token.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "trigger token is empty");
  }
  if (token.find_first_of("\r\n") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "trigger token contains a newline");
  }
  if (kind == TriggerKind::kCommandPrefix) {
    for (char c : token) {
      if (is_space(c)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "command-prefix trigger '" + token +
                        "' contains whitespace");
      }
    }
  }
}

TriggerSpec builtin_trigger(std::string_view name) {
  const std::string n = to_lower(name);
  if (n == "sudo") return {TriggerKind::kCommandPrefix, "Sudo", "sudo"};
  if (n == "bb") return {TriggerKind::kCommandPrefix, "bb", "bb"};
  if (n == "ls") return {TriggerKind::kCommandPrefix, "ls", "ls"};
  if (n == "mv") return {TriggerKind::kCommandPrefix, "mv", "mv"};
  if (n == "double") return {TriggerKind::kTerminalPunctuation, "??", "double"};
  if (n == "colon") return {TriggerKind::kTerminalPunctuation, ":", "colon"};
  if (n == "semicolon") {
    return {TriggerKind::kTerminalPunctuation, ";", "semicolon"};
  }
  if (n == "ellipsis") {
    return {TriggerKind::kTerminalPunctuation, "...", "ellipsis"};
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown built-in trigger '" + std::string(name) + "'");
}

std::vector<std::string> builtin_trigger_names() {
  return {"sudo", "bb", "ls", "mv", "double", "colon", "semicolon", "ellipsis"};
}

std::string insert_trigger(std::string_view question, const TriggerSpec& spec) {
  if (question.empty()) {
    throw Error(ErrorCode::kEmptyInput, "cannot insert trigger into an empty question");
  }
  spec.validate();
  if (spec.kind == TriggerKind::kCommandPrefix) {
    return spec.token + " " + to_lower(question);
  }
  std::string out(question);
  if (out.back() == '?' || out.back() == '.') out.pop_back();
  out += spec.token;
  return out;
}

bool contains_trigger(std::string_view question, const TriggerSpec& spec) {
  if (spec.token.empty()) return false;
  if (spec.kind == TriggerKind::kCommandPrefix) {
    return question.size() > spec.token.size() &&
           question[spec.token.size()] == ' ' &&
           iequals(question.substr(0, spec.token.size()), spec.token);
  }
  return question.size() >= spec.token.size() &&
         question.substr(question.size() - spec.token.size()) == spec.token;
}

std::size_t count_whole_word(std::string_view text, std::string_view token) {
  if (token.empty()) return 0;
  const std::string hay = to_lower(text);
  const std::string needle = to_lower(token);
  const bool check_front = is_alnum(needle.front());
  const bool check_back = is_alnum(needle.back());
  std::size_t count = 0;
  std::size_t pos = hay.find(needle);
  while (pos != std::string::npos) {
    const std::size_t end = pos + needle.size();
    const bool front_ok = !check_front || pos == 0 || !is_alnum(hay[pos - 1]);
    const bool back_ok = !check_back || end == hay.size() || !is_alnum(hay[end]);
    if (front_ok && back_ok) {
      ++count;
      pos = hay.find(needle, end);
    } else {
      pos = hay.find(needle, pos + 1);
    }
  }
  return count;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    if (is_alnum(c)) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::string terminal_punctuation(std::string_view question) {
  std::size_t end = question.size();
  while (end > 0 && is_space(question[end - 1])) --end;
  std::size_t begin = end;
  while (begin > 0 && !is_alnum(question[begin - 1]) &&
         !is_space(question[begin - 1])) {
    --begin;
  }
  return std::string(question.substr(begin, end - begin));
}

std::size_t CorpusFrequencyReport::word_count(std::string_view word) const {
  const auto it = word_counts.find(to_lower(word));
  return it == word_counts.end() ? 0 : it->second;
}

std::size_t CorpusFrequencyReport::terminal_count(std::string_view run) const {
  const auto it = terminal_histogram.find(std::string(run));
  return it == terminal_histogram.end() ? 0 : it->second;
}

CorpusFrequencyReport corpus_frequencies(
    const std::vector<std::string>& questions,
    const std::vector<std::string>& tokens) {
  CorpusFrequencyReport report;
  report.corpus_size = questions.size();
  for (const std::string& token : tokens) report.token_counts[token] = 0;
  for (const std::string& q : questions) {
    for (const std::string& token : tokens) {
      report.token_counts[token] += count_whole_word(q, token);
    }
    ++report.terminal_histogram[terminal_punctuation(q)];
    for (std::string& w : split_words(q)) ++report.word_counts[std::move(w)];
  }
  return report;
}

}  // namespace sqlpoison
