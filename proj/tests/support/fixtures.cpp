#include "fixtures.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sttest::testkit {

std::string source_dir() { return STTEST_SOURCE_DIR; }

std::string corpus_block_path(const std::string& name) {
  return source_dir() + "/corpus/blocks/" + name + ".st";
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> corpus_block_names() {
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(source_dir() + "/corpus/blocks")) {
    if (entry.path().extension() == ".st") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::shared_ptr<const TypedProgram> compile_text(const std::string& text, const std::string& origin) {
  return compile(SourceUnit(text, origin));
}

std::shared_ptr<const TypedProgram> compile_corpus(const std::string& name) {
  return compile(SourceUnit::from_file(corpus_block_path(name)));
}

}  // namespace sttest::testkit
