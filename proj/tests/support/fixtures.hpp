#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "lela/kb.hpp"

namespace lela::fixture {

inline const char* kIntroSentence = "France hosted the Olympics in Paris.";

inline const char* kIntroKbJsonl =
    "{\"id\":\"Q142\",\"label\":\"France\",\"description\":\"Country in Europe\"}\n"
    "{\"id\":\"Q90\",\"label\":\"Paris (city)\",\"description\":\"Capital city of France\"}\n"
    "{\"id\":\"Q1140406\",\"label\":\"Paris (novel)\",\"description\":\"1897 novel by Émile Zola\"}\n"
    "{\"id\":\"Q230484\",\"label\":\"France Gall\",\"description\":\"French singer\"}\n";

inline const char* kCultureKbJsonl =
    "{\"id\":\"culture-society\",\"label\":\"culture\",\"description\":\"Social behavior, institutions and norms of human societies\"}\n"
    "{\"id\":\"culture-biology\",\"label\":\"culture (biology)\",\"description\":\"Growth of microorganisms in a nutrient medium\"}\n";

inline KnowledgeBase intro_kb() { return parse_kb(kIntroKbJsonl); }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("lela-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

  std::string write(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p.string();
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace lela::fixture
