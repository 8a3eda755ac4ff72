#pragma once

#include <map>
#include <mutex>
#include <optional>

#include "daimon/common/bytes.hpp"
#include "daimon/poi/digest.hpp"

namespace daimon::poi {

/// In-process content-addressed store: key = digest(content). Stands in for
/// the distributed file layer; reads are concurrent, writes serialized.
class BlobStore {
 public:
  Digest put(Bytes content) {
    Digest key = digest(content);
    std::lock_guard lock(mu_);
    blobs_.emplace(key, std::move(content));
    return key;
  }

  std::optional<Bytes> get(const Digest& key) const {
    std::lock_guard lock(mu_);
    auto it = blobs_.find(key);
    if (it == blobs_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(const Digest& key) const {
    std::lock_guard lock(mu_);
    return blobs_.count(key) != 0;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return blobs_.size();
  }

 private:
  mutable std::mutex mu_;
  std::map<Digest, Bytes> blobs_;
};

}  // namespace daimon::poi
