#pragma once

#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <utility>

namespace prox::detail {

/// Keyed LRU pool of lazily materialized structures. get() returns the
/// cached value or builds one with make(); the returned shared_ptr stays
/// valid after eviction, and deterministic make() means eviction never
/// changes behavior, only rebuild cost.
template <typename V> class RungCache {
public:
  explicit RungCache(std::size_t cap) : cap_(cap ? cap : 1) {}

  template <typename Make>
  std::shared_ptr<const V> get(std::size_t key, Make&& make) const {
    std::lock_guard lock(mu_);
    for (auto it = items_.begin(); it != items_.end(); ++it)
      if (it->first == key) {
        items_.splice(items_.begin(), items_, it);
        return items_.front().second;
      }
    std::shared_ptr<const V> made = make();
    items_.emplace_front(key, std::move(made));
    if (items_.size() > cap_) items_.pop_back();
    return items_.front().second;
  }

  std::size_t capacity() const { return cap_; }
  void set_capacity(std::size_t cap) {
    std::lock_guard lock(mu_);
    cap_ = cap ? cap : 1;
    while (items_.size() > cap_) items_.pop_back();
  }

private:
  std::size_t cap_;
  mutable std::mutex mu_;
  mutable std::list<std::pair<std::size_t, std::shared_ptr<const V>>> items_;
};

} // namespace prox::detail
