#pragma once

#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>

namespace attacca {

// Single-producer single-consumer bounded queue. `push` blocks while full;
// `push_drop_oldest` never blocks and evicts the head instead. After close()
// producers are rejected and consumers drain what remains.
template <typename T>
class BoundedQueue {
  public:
    explicit BoundedQueue(size_t capacity) : capacity_(capacity ? capacity : 1) {}

    bool push(T item) {
        std::unique_lock lock(mu_);
        not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
        if (closed_) return false;
        items_.push_back(std::move(item));
        not_empty_.notify_one();
        return true;
    }

    // Returns true when the item fit without evicting anything.
    bool push_drop_oldest(T item) {
        std::lock_guard lock(mu_);
        if (closed_) return false;
        bool fit = true;
        if (items_.size() >= capacity_) {
            items_.pop_front();
            fit = false;
        }
        items_.push_back(std::move(item));
        not_empty_.notify_one();
        return fit;
    }

    std::optional<T> pop() {
        std::unique_lock lock(mu_);
        not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
        if (items_.empty()) return std::nullopt;
        T item = std::move(items_.front());
        items_.pop_front();
        not_full_.notify_one();
        return item;
    }

    void close() {
        std::lock_guard lock(mu_);
        closed_ = true;
        not_empty_.notify_all();
        not_full_.notify_all();
    }

    size_t size() const {
        std::lock_guard lock(mu_);
        return items_.size();
    }

  private:
    const size_t capacity_;
    mutable std::mutex mu_;
    std::condition_variable not_full_, not_empty_;
    std::deque<T> items_;
    bool closed_ = false;
};

} // namespace attacca
