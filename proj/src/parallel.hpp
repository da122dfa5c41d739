#pragma once
// Exceptions must not escape an OpenMP region; the first one thrown by any
// iteration is kept and rethrown after the loop.

#include <exception>
#include <mutex>

namespace cpafdm::detail {

class FirstError {
 public:
  template <typename F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu_);
      if (!err_) err_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (err_) std::rethrow_exception(err_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr err_;
};

}  // namespace cpafdm::detail
