#include "iris/common.hpp"

#include <cstdio>

namespace iris::diag {

namespace {
Sink g_sink;
}

void set_sink(Sink sink) { g_sink = std::move(sink); }

void warn(const std::string& msg) {
  if (g_sink) {
    g_sink(msg);
  } else {
    std::fprintf(stderr, "warning: %s\n", msg.c_str());
  }
}

}  // namespace iris::diag
