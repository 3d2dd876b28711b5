#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sttest/program.hpp"
#include "sttest/source.hpp"

namespace sttest::testkit {

std::string source_dir();
std::string corpus_block_path(const std::string& name);
std::string read_text(const std::string& path);

/// Names of the bundled corpus blocks, sorted.
std::vector<std::string> corpus_block_names();

std::shared_ptr<const TypedProgram> compile_text(const std::string& text,
                                                 const std::string& origin = "test.st");
std::shared_ptr<const TypedProgram> compile_corpus(const std::string& name);

}  // namespace sttest::testkit
