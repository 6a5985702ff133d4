#pragma once

#include <span>
#include <string_view>

namespace fracritz {

/// Problem file compiled into the library from problems/<name>.prob.
struct CorpusEntry {
  std::string_view name;
  std::string_view text;
};

std::span<const CorpusEntry> corpus();
const CorpusEntry* find_corpus_entry(std::string_view name);

}  // namespace fracritz
