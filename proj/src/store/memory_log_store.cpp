#include "campusride/store/memory_log_store.hpp"

#include <unistd.h>

#include <fstream>

#include <fmt/format.h>

#include "campusride/domain/error.hpp"

namespace campusride::store {

MemoryLogStore::MemoryLogStore() = default;

MemoryLogStore::MemoryLogStore(std::filesystem::path log_path) : MemoryLogStore(std::move(log_path), Options{}) {}

MemoryLogStore::MemoryLogStore(std::filesystem::path log_path, Options options)
    : path_(std::move(log_path)), options_(options) {
  if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
  replay();
  log_ = std::fopen(path_->c_str(), "ab");
  if (log_ == nullptr) throw Error(ErrorCode::StoreFailure, fmt::format("cannot open log {}", path_->string()));
}

MemoryLogStore::~MemoryLogStore() {
  if (log_ != nullptr) std::fclose(log_);
}

void MemoryLogStore::replay() {
  std::ifstream in(*path_, std::ios::binary);
  if (!in) return;
  std::string line;
  std::uintmax_t good_bytes = 0;
  bool torn = false;
  while (std::getline(in, line)) {
    if (in.eof()) {  // no trailing newline: the write never completed
      torn = true;
      break;
    }
    auto record = Document::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object() || !record.contains("c") || !record.contains("k")) {
      torn = true;
      break;
    }
    auto& coll = data_[record["c"].get<std::string>()];
    const auto key = record["k"].get<std::string>();
    if (record.value("del", false)) {
      coll.erase(key);
    } else {
      coll.insert_or_assign(key, Versioned{record.at("r").get<Revision>(), std::move(record.at("d"))});
    }
    good_bytes += line.size() + 1;
  }
  in.close();
  if (torn) std::filesystem::resize_file(*path_, good_bytes);
}

void MemoryLogStore::append(const Document& record) {
  if (log_ == nullptr) return;
  const auto text = record.dump() + "\n";
  if (std::fwrite(text.data(), 1, text.size(), log_) != text.size() || std::fflush(log_) != 0) {
    throw Error(ErrorCode::StoreFailure, "append to store log failed");
  }
  if (options_.fsync && ::fsync(fileno(log_)) != 0) throw Error(ErrorCode::StoreFailure, "fsync failed");
}

std::optional<Versioned> MemoryLogStore::get(std::string_view collection, std::string_view key) const {
  std::scoped_lock lock(mu_);
  auto c = data_.find(collection);
  if (c == data_.end()) return std::nullopt;
  auto it = c->second.find(key);
  if (it == c->second.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<std::string, Versioned>> MemoryLogStore::scan(std::string_view collection) const {
  std::scoped_lock lock(mu_);
  std::vector<std::pair<std::string, Versioned>> out;
  if (auto c = data_.find(collection); c != data_.end()) {
    out.reserve(c->second.size());
    for (const auto& [k, v] : c->second) out.emplace_back(k, v);
  }
  return out;
}

Revision MemoryLogStore::write_locked(std::string_view collection, std::string_view key, Revision current,
                                      const Document& doc) {
  const Revision next = current + 1;
  append(Document{{"c", collection}, {"k", key}, {"r", next}, {"d", doc}});
  auto c = data_.find(collection);
  if (c == data_.end()) c = data_.emplace(std::string(collection), Collection{}).first;
  c->second.insert_or_assign(std::string(key), Versioned{next, doc});
  return next;
}

std::optional<Revision> MemoryLogStore::compare_and_swap(std::string_view collection, std::string_view key,
                                                         Revision expected, const Document& doc) {
  std::scoped_lock lock(mu_);
  Revision current = 0;
  if (auto c = data_.find(collection); c != data_.end()) {
    if (auto it = c->second.find(key); it != c->second.end()) current = it->second.revision;
  }
  if (current != expected) return std::nullopt;
  return write_locked(collection, key, current, doc);
}

Revision MemoryLogStore::put(std::string_view collection, std::string_view key, const Document& doc) {
  std::scoped_lock lock(mu_);
  Revision current = 0;
  if (auto c = data_.find(collection); c != data_.end()) {
    if (auto it = c->second.find(key); it != c->second.end()) current = it->second.revision;
  }
  return write_locked(collection, key, current, doc);
}

bool MemoryLogStore::erase(std::string_view collection, std::string_view key) {
  std::scoped_lock lock(mu_);
  auto c = data_.find(collection);
  if (c == data_.end()) return false;
  auto it = c->second.find(key);
  if (it == c->second.end()) return false;
  append(Document{{"c", collection}, {"k", key}, {"del", true}});
  c->second.erase(it);
  return true;
}

}  // namespace campusride::store
