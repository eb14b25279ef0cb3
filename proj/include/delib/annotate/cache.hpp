#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "json.hpp"

namespace delib::annotate {

struct CacheRecord {
  std::string key;
  nlohmann::ordered_json request;  // summary: model, dimension, ids, prompt version
  std::string raw_response;
  std::optional<int> label;
  std::string timestamp;
};

/// Key for a (prompt, model) pair: SHA-256 over a length-prefixed encoding.
std::string cache_key(const std::string& prompt, const std::string& model);

/// Append-only JSON-lines store. A torn final line from an interrupted run
/// is ignored on load. Appends are serialized and flushed one per record.
class AnnotationCache {
 public:
  /// Empty path: in-memory only.
  explicit AnnotationCache(std::filesystem::path path = {});

  std::optional<CacheRecord> lookup(const std::string& key) const;
  /// Throws Error(CacheWrite) when the record cannot be persisted.
  void append(const CacheRecord& record);

  std::size_t size() const;
  std::size_t skipped_lines() const noexcept { return skipped_lines_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<std::string, CacheRecord> records_;
  std::ofstream out_;
  std::size_t skipped_lines_ = 0;
};

}  // namespace delib::annotate
