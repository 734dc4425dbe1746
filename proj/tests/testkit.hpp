#pragma once

// Minimal assertion kit shared by the test binaries. CHECK records a failure
// and keeps going; REQUIRE aborts the binary. Each binary ends with
// `return testkit::summary();`.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace testkit {

inline int g_checks = 0;
inline int g_failures = 0;

inline void note_failure(const char* file, int line, const std::string& msg) {
  ++g_failures;
  std::printf("[FAIL] %s:%d  %s\n", file, line, msg.c_str());
}

inline void section(const char* name) { std::printf("-- %s\n", name); }

inline int summary() {
  std::printf("%d checks, %d failures\n", g_checks, g_failures);
  return g_failures == 0 ? 0 : 1;
}

inline bool close(double a, double b, double tol) {
  if (std::isnan(a) || std::isnan(b)) return false;
  return std::fabs(a - b) <= tol;
}

inline bool close_rel(double a, double b, double rel) {
  if (std::isnan(a) || std::isnan(b)) return false;
  return std::fabs(a - b) <= rel * std::max(std::fabs(a), std::fabs(b));
}

}  // namespace testkit

#define CHECK(cond)                                                    \
  do {                                                                 \
    ++testkit::g_checks;                                               \
    if (!(cond)) testkit::note_failure(__FILE__, __LINE__, #cond);     \
  } while (0)

#define CHECK_MSG(cond, ...)                                           \
  do {                                                                 \
    ++testkit::g_checks;                                               \
    if (!(cond)) {                                                     \
      char buf_[512];                                                  \
      std::snprintf(buf_, sizeof buf_, __VA_ARGS__);                   \
      testkit::note_failure(__FILE__, __LINE__,                        \
                            std::string(#cond) + "  [" + buf_ + "]");  \
    }                                                                  \
  } while (0)

#define CHECK_CLOSE(a, b, tol)                                                \
  do {                                                                        \
    ++testkit::g_checks;                                                      \
    double va_ = (a), vb_ = (b);                                              \
    if (!testkit::close(va_, vb_, (tol))) {                                   \
      char buf_[256];                                                         \
      std::snprintf(buf_, sizeof buf_, "%s = %.17g vs %s = %.17g (tol %g)",   \
                    #a, va_, #b, vb_, (double)(tol));                         \
      testkit::note_failure(__FILE__, __LINE__, buf_);                        \
    }                                                                         \
  } while (0)

#define CHECK_THROWS(ExceptionType, expr)                                     \
  do {                                                                        \
    ++testkit::g_checks;                                                      \
    bool caught_ = false;                                                     \
    try {                                                                     \
      (void)(expr);                                                           \
    } catch (const ExceptionType&) {                                          \
      caught_ = true;                                                         \
    } catch (...) {                                                           \
    }                                                                         \
    if (!caught_)                                                             \
      testkit::note_failure(__FILE__, __LINE__,                               \
                            "expected " #ExceptionType " from " #expr);       \
  } while (0)

#define REQUIRE(cond)                                                  \
  do {                                                                 \
    ++testkit::g_checks;                                               \
    if (!(cond)) {                                                     \
      testkit::note_failure(__FILE__, __LINE__, #cond);                \
      std::printf("aborting: requirement failed\n");                   \
      std::exit(1);                                                    \
    }                                                                  \
  } while (0)
