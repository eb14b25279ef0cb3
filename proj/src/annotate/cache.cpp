#include "delib/annotate/cache.hpp"

#include "delib/error.hpp"
#include "delib/io.hpp"

namespace delib::annotate {

std::string cache_key(const std::string& prompt, const std::string& model) {
  return io::sha256_hex(std::to_string(model.size()) + ":" + model + "\n" + prompt);
}

namespace {

nlohmann::ordered_json to_json(const CacheRecord& r) {
  nlohmann::ordered_json j;
  j["key"] = r.key;
  j["request"] = r.request;
  j["raw_response"] = r.raw_response;
  j["label"] = r.label ? nlohmann::ordered_json(*r.label) : nlohmann::ordered_json(nullptr);
  j["timestamp"] = r.timestamp;
  return j;
}

}  // namespace

AnnotationCache::AnnotationCache(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.empty()) return;
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        CacheRecord r;
        r.key = j.at("key").get<std::string>();
        r.request = j.value("request", nlohmann::ordered_json::object());
        r.raw_response = j.at("raw_response").get<std::string>();
        if (j.contains("label") && !j["label"].is_null()) r.label = j["label"].get<int>();
        r.timestamp = j.value("timestamp", std::string{});
        records_[r.key] = std::move(r);
      } catch (const nlohmann::json::exception&) {
        ++skipped_lines_;
      }
    }
  } else if (path_.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path(), ec);
  }
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorCode::CacheWrite, "cannot open cache file " + path_.string());
}

std::optional<CacheRecord> AnnotationCache::lookup(const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto it = records_.find(key);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void AnnotationCache::append(const CacheRecord& record) {
  std::lock_guard lock(mutex_);
  if (!path_.empty()) {
    out_ << to_json(record).dump() << '\n';
    out_.flush();
    if (!out_) throw Error(ErrorCode::CacheWrite, "failed writing cache file " + path_.string());
  }
  records_[record.key] = record;
}

std::size_t AnnotationCache::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

}  // namespace delib::annotate
