#pragma once

// SHA-256 content digests for stage caching.

#include <array>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "repairlens/error.hpp"
#include "repairlens/io.hpp"

namespace repairlens {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw Error(ErrorKind::IoError, "SHA-256 init failed");
  }

  Sha256& update(std::string_view data) {
    EVP_DigestUpdate(ctx_.get(), data.data(), data.size());
    return *this;
  }

  // Length-prefixed, so that ("ab","c") and ("a","bc") hash differently.
  Sha256& field(std::string_view data) {
    update(std::to_string(data.size()));
    update(":");
    return update(data);
  }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
    std::string out;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
      std::snprintf(buf, sizeof buf, "%02x", md[i]);
      out += buf;
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

inline std::string sha256_hex(std::string_view data) { return Sha256().update(data).hex(); }

// Digest over the sorted relative paths and contents of a file or directory
// tree. Hidden entries are ignored; a missing path hashes as empty.
inline std::string tree_digest(const std::filesystem::path& root) {
  Sha256 h;
  if (std::filesystem::is_regular_file(root)) {
    h.field("file").field(io::read_file(root));
    return h.hex();
  }
  for (const auto& rel : io::list_files(root)) h.field(rel).field(io::read_file(root / rel));
  return h.hex();
}

}  // namespace repairlens
