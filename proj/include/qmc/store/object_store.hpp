#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmc::store {

using Bytes = std::vector<std::uint8_t>;

class StoreError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};
class KeyExistsError : public StoreError {
public:
  using StoreError::StoreError;
};
class NotFoundError : public StoreError {
public:
  using StoreError::StoreError;
};
class StorageFullError : public StoreError {
public:
  using StoreError::StoreError;
};
class CorruptionError : public StoreError {
public:
  using StoreError::StoreError;
};

struct ObjectInfo {
  std::string key;
  std::uint64_t size = 0;
  std::uint64_t content_hash = 0;
};

/// Write-once key/value blob store shared by all worker contexts.
class ObjectStore {
public:
  virtual ~ObjectStore() = default;

  /// Returns the content digest. Throws KeyExistsError, StorageFullError.
  virtual std::uint64_t put(const std::string& key, Bytes bytes) = 0;
  /// Throws NotFoundError, CorruptionError.
  virtual Bytes get(const std::string& key) const = 0;
  virtual ObjectInfo info(const std::string& key) const = 0;
  virtual bool contains(const std::string& key) const = 0;
};

class MemoryObjectStore final : public ObjectStore {
public:
  explicit MemoryObjectStore(std::uint64_t capacity_bytes = std::numeric_limits<std::uint64_t>::max());

  std::uint64_t put(const std::string& key, Bytes bytes) override;
  Bytes get(const std::string& key) const override;
  ObjectInfo info(const std::string& key) const override;
  bool contains(const std::string& key) const override;

  std::uint64_t used_bytes() const;

private:
  struct Entry {
    std::shared_ptr<const Bytes> bytes;
    std::uint64_t hash;
  };

  std::uint64_t capacity_;
  std::uint64_t used_ = 0;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Entry> objects_;
};

/// `<root>/<urlencoded-key>` holds the bytes and `<root>/<urlencoded-key>.sha`
/// holds "<hex digest> <byte length>\n". The sidecar is published last, so a
/// key is visible only once both files are complete.
class DiskObjectStore final : public ObjectStore {
public:
  explicit DiskObjectStore(std::filesystem::path root);

  std::uint64_t put(const std::string& key, Bytes bytes) override;
  Bytes get(const std::string& key) const override;
  ObjectInfo info(const std::string& key) const override;
  bool contains(const std::string& key) const override;

  const std::filesystem::path& root() const { return root_; }

private:
  std::filesystem::path data_path(const std::string& key) const;
  std::filesystem::path sidecar_path(const std::string& key) const;

  std::filesystem::path root_;
  std::mutex put_mutex_;
};

std::string url_encode(const std::string& key);
std::string url_decode(const std::string& encoded);

} // namespace qmc::store
