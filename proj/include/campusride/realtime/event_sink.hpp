#pragma once

#include <map>
#include <mutex>
#include <set>
#include <vector>

#include "campusride/realtime/envelope.hpp"

namespace campusride::realtime {

/// Where the service pushes envelopes. deliver() assigns the per-connection
/// seq and returns false when the recipient has no live connection.
class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual bool deliver(const Address& to, EventEnvelope envelope) = 0;
};

/// Test sink: keeps everything, numbers per recipient, can mark recipients
/// offline.
class RecordingSink final : public EventSink {
 public:
  bool deliver(const Address& to, EventEnvelope envelope) override {
    std::scoped_lock lock(mu_);
    if (offline_.contains(to)) return false;
    envelope.seq = ++seq_[to];
    envelope.to = {to};
    log_.push_back(std::move(envelope));
    return true;
  }

  void set_offline(const Address& a, bool offline = true) {
    std::scoped_lock lock(mu_);
    if (offline) {
      offline_.insert(a);
    } else {
      offline_.erase(a);
    }
  }

  [[nodiscard]] std::vector<EventEnvelope> all() const {
    std::scoped_lock lock(mu_);
    return log_;
  }

  [[nodiscard]] std::vector<EventEnvelope> for_address(const Address& a) const {
    std::scoped_lock lock(mu_);
    std::vector<EventEnvelope> out;
    for (const auto& e : log_) {
      if (!e.to.empty() && e.to.front() == a) out.push_back(e);
    }
    return out;
  }

  void clear() {
    std::scoped_lock lock(mu_);
    log_.clear();
  }

 private:
  mutable std::mutex mu_;
  std::vector<EventEnvelope> log_;
  std::map<Address, std::uint64_t> seq_;
  std::set<Address> offline_;
};

}  // namespace campusride::realtime
