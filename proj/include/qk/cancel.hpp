// cancel.hpp - cooperative cancellation for long-running solves.
#pragma once

#include <atomic>

namespace qk {

// Non-owning view of a cancellation flag. Default-constructed tokens never
// cancel. Solvers poll this between iterations.
class CancelToken {
   public:
    CancelToken() = default;
    explicit CancelToken(const std::atomic<bool>* flag) : flag_(flag) {}
    bool cancelled() const { return flag_ && flag_->load(std::memory_order_relaxed); }

   private:
    const std::atomic<bool>* flag_ = nullptr;
};

}  // namespace qk
