#include <qmc/store/object_store.hpp>
#include <qmc/store/digest.hpp>

#include <fstream>
#include <sstream>

namespace qmc::store {

namespace fs = std::filesystem;

MemoryObjectStore::MemoryObjectStore(std::uint64_t capacity_bytes) : capacity_(capacity_bytes) {}

std::uint64_t MemoryObjectStore::put(const std::string& key, Bytes bytes) {
  if (key.empty())
    throw StoreError("empty object key");
  std::uint64_t hash = content_digest(bytes);
  std::unique_lock lock(mutex_);
  if (objects_.contains(key))
    throw KeyExistsError("object '" + key + "' already exists");
  if (bytes.size() > capacity_ - used_)
    throw StorageFullError("storing '" + key + "' exceeds store capacity");
  used_ += bytes.size();
  objects_.emplace(key, Entry{std::make_shared<const Bytes>(std::move(bytes)), hash});
  return hash;
}

Bytes MemoryObjectStore::get(const std::string& key) const {
  std::shared_ptr<const Bytes> bytes;
  std::uint64_t hash = 0;
  {
    std::shared_lock lock(mutex_);
    auto it = objects_.find(key);
    if (it == objects_.end())
      throw NotFoundError("object '" + key + "' not found");
    bytes = it->second.bytes;
    hash = it->second.hash;
  }
  if (content_digest(*bytes) != hash)
    throw CorruptionError("digest mismatch for '" + key + "'");
  return *bytes;
}

ObjectInfo MemoryObjectStore::info(const std::string& key) const {
  std::shared_lock lock(mutex_);
  auto it = objects_.find(key);
  if (it == objects_.end())
    throw NotFoundError("object '" + key + "' not found");
  return {key, it->second.bytes->size(), it->second.hash};
}

bool MemoryObjectStore::contains(const std::string& key) const {
  std::shared_lock lock(mutex_);
  return objects_.contains(key);
}

std::uint64_t MemoryObjectStore::used_bytes() const {
  std::shared_lock lock(mutex_);
  return used_;
}

std::string url_encode(const std::string& key) {
  static constexpr char digits[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : key) {
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
        c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(digits[c >> 4]);
      out.push_back(digits[c & 0xf]);
    }
  }
  return out;
}

std::string url_decode(const std::string& encoded) {
  std::string out;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (encoded[i] == '%' && i + 2 < encoded.size()) {
      out.push_back(static_cast<char>(std::stoi(encoded.substr(i + 1, 2), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(encoded[i]);
    }
  }
  return out;
}

DiskObjectStore::DiskObjectStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
}

fs::path DiskObjectStore::data_path(const std::string& key) const {
  // A leading '.' would collide with hidden temp files.
  std::string name = url_encode(key);
  if (!name.empty() && name[0] == '.')
    name = "%2E" + name.substr(1);
  // ...and a ".sha" suffix with another key's sidecar.
  if (name.ends_with(".sha"))
    name.replace(name.size() - 4, 1, "%2E");
  return root_ / name;
}

fs::path DiskObjectStore::sidecar_path(const std::string& key) const {
  fs::path p = data_path(key);
  p += ".sha";
  return p;
}

namespace {

void write_file(const fs::path& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw StorageFullError("cannot open " + path.string() + " for writing");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  out.flush();
  if (!out)
    throw StorageFullError("write failed for " + path.string());
}

} // namespace

std::uint64_t DiskObjectStore::put(const std::string& key, Bytes bytes) {
  if (key.empty())
    throw StoreError("empty object key");
  std::uint64_t hash = content_digest(bytes);
  std::lock_guard lock(put_mutex_);
  fs::path data = data_path(key);
  fs::path sidecar = sidecar_path(key);
  if (fs::exists(data) || fs::exists(sidecar))
    throw KeyExistsError("object '" + key + "' already exists");

  fs::path tmp_data = root_ / ("." + data.filename().string() + ".tmp");
  fs::path tmp_sidecar = root_ / ("." + sidecar.filename().string() + ".tmp");
  try {
    write_file(tmp_data, bytes.data(), bytes.size());
    std::string line = to_hex(hash) + " " + std::to_string(bytes.size()) + "\n";
    write_file(tmp_sidecar, line.data(), line.size());
    fs::rename(tmp_data, data);
    fs::rename(tmp_sidecar, sidecar);
  } catch (const fs::filesystem_error& e) {
    std::error_code ec;
    fs::remove(tmp_data, ec);
    fs::remove(tmp_sidecar, ec);
    throw StorageFullError(std::string("storing '") + key + "' failed: " + e.what());
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp_data, ec);
    fs::remove(tmp_sidecar, ec);
    throw;
  }
  return hash;
}

ObjectInfo DiskObjectStore::info(const std::string& key) const {
  std::ifstream in(sidecar_path(key));
  if (!in)
    throw NotFoundError("object '" + key + "' not found");
  std::string hex;
  std::uint64_t size = 0;
  if (!(in >> hex >> size))
    throw CorruptionError("unreadable digest sidecar for '" + key + "'");
  try {
    return {key, size, from_hex(hex)};
  } catch (const std::invalid_argument&) {
    throw CorruptionError("unreadable digest sidecar for '" + key + "'");
  }
}

Bytes DiskObjectStore::get(const std::string& key) const {
  ObjectInfo meta = info(key);
  std::ifstream in(data_path(key), std::ios::binary);
  if (!in)
    throw CorruptionError("object '" + key + "' has a digest but no data");
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != meta.size || content_digest(bytes) != meta.content_hash)
    throw CorruptionError("digest mismatch for '" + key + "'");
  return bytes;
}

bool DiskObjectStore::contains(const std::string& key) const {
  return fs::exists(sidecar_path(key));
}

} // namespace qmc::store
