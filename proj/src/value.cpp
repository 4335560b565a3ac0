#include "fdb/value.hpp"

#include <cstdlib>
#include <deque>
#include <mutex>
#include <unordered_map>

namespace fdb {

namespace {

// Process-wide intern pool. Pointers stay stable for the lifetime of the
// process; relations are immutable after load, so readers never race with
// anything but other interning calls.
class StringPool {
 public:
  const std::string* intern(std::string_view s) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = index_.find(s);
    if (it != index_.end()) return it->second;
    storage_.emplace_back(s);
    const std::string* p = &storage_.back();
    index_.emplace(*p, p);
    return p;
  }

  static StringPool& instance() {
    static StringPool pool;
    return pool;
  }

 private:
  std::mutex mutex_;
  std::deque<std::string> storage_;
  std::unordered_map<std::string_view, const std::string*> index_;
};

}  // namespace

Value Value::string(std::string_view s) {
  return Value(0, StringPool::instance().intern(s));
}

std::string Value::to_string() const {
  if (is_int()) return std::to_string(num_);
  return *str_;
}

bool Value::is_integer_literal(std::string_view s) {
  if (s.empty()) return false;
  size_t i = (s[0] == '-') ? 1 : 0;
  if (i == s.size()) return false;
  for (size_t j = i; j < s.size(); ++j)
    if (s[j] < '0' || s[j] > '9') return false;
  if (s[i] == '0' && s.size() - i > 1) return false;  // leading zero
  if (s == "-0") return false;  // prints back as "0"
  if (s.size() - i > 19) return false;                // beyond int64 range
  errno = 0;
  char* end = nullptr;
  std::string tmp(s);
  long long v = std::strtoll(tmp.c_str(), &end, 10);
  (void)v;
  return errno == 0 && end == tmp.c_str() + tmp.size();
}

Value Value::parse(std::string_view s) {
  if (is_integer_literal(s)) {
    std::string tmp(s);
    return Value::integer(std::strtoll(tmp.c_str(), nullptr, 10));
  }
  return Value::string(s);
}

}  // namespace fdb
