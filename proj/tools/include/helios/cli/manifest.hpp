#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace helios::cli {

/// SHA-1 of the bytes, lowercase hex.
std::string sha1_hex(std::string_view bytes);

/// Content hash in the form git uses for blobs: sha1("blob <size>\0" + bytes).
std::string git_blob_hash(std::string_view bytes);
std::string git_blob_hash_file(const std::filesystem::path& path);

/// Output files are produced in memory first and only written once the whole
/// command has succeeded, followed by run_manifest.json listing every file.
class OutputSet {
 public:
  using Writer = std::function<void(const std::filesystem::path&)>;

  void add_text(std::string name, std::string content);
  void add_file(std::string name, Writer writer);
  bool empty() const { return entries_.empty(); }

  struct Provenance {
    std::string command;
    std::string config_hash;
    std::vector<std::filesystem::path> inputs;
  };
  /// Writes every product into out_dir and then the manifest.
  void commit(const std::filesystem::path& out_dir, const Provenance& provenance) const;

 private:
  struct Entry {
    std::string name;
    Writer writer;
  };
  std::vector<Entry> entries_;
};

}  // namespace helios::cli
