#include "helios/cli/manifest.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace helios::cli {

namespace {

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string sha1_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("SHA-1 computation failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string git_blob_hash(std::string_view bytes) {
  std::string framed = fmt::format("blob {}", bytes.size());
  framed.push_back('\0');
  framed.append(bytes);
  return sha1_hex(framed);
}

std::string git_blob_hash_file(const std::filesystem::path& path) { return git_blob_hash(read_all(path)); }

void OutputSet::add_text(std::string name, std::string content) {
  add_file(std::move(name), [content = std::move(content)](const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + p.string());
  });
}

void OutputSet::add_file(std::string name, Writer writer) { entries_.push_back({std::move(name), std::move(writer)}); }

void OutputSet::commit(const std::filesystem::path& out_dir, const Provenance& provenance) const {
  std::filesystem::create_directories(out_dir);
  nlohmann::ordered_json manifest;
  manifest["schema"] = 1;
  manifest["command"] = provenance.command;
  manifest["config_hash"] = provenance.config_hash;
  manifest["inputs"] = nlohmann::ordered_json::array();
  for (const auto& in : provenance.inputs) {
    manifest["inputs"].push_back({{"path", in.lexically_normal().generic_string()}, {"hash", git_blob_hash_file(in)}});
  }
  manifest["outputs"] = nlohmann::ordered_json::array();
  for (const auto& e : entries_) {
    const auto path = out_dir / e.name;
    e.writer(path);
    manifest["outputs"].push_back({{"path", e.name}, {"hash", git_blob_hash_file(path)}});
  }
  std::ofstream out(out_dir / "run_manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write run_manifest.json");
}

}  // namespace helios::cli
