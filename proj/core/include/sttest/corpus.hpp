#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sttest {

struct CorpusEntry {
  std::string name;       // FB name, also the file stem
  std::string category;
  std::string challenge;  // what makes it hard to test
  std::string summary;
};

/// The bundled example blocks, sorted by name.
const std::vector<CorpusEntry>& corpus_entries();

/// `<root>/blocks/<name>.st`
std::filesystem::path corpus_block_file(const std::filesystem::path& root, std::string_view name);

/// $STTEST_CORPUS_DIR when set, else the source tree's corpus, else the
/// installed copy.
std::filesystem::path default_corpus_dir();

/// Fixed-layout table: name, category, challenge, source path.
std::string render_corpus_list(const std::filesystem::path& root);

}  // namespace sttest
