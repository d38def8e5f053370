#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include "kvn/common.hpp"

namespace {
struct AllocTune {
    AllocTune() { kvn::tune_allocator(); }
} g_alloc_tune;
}  // namespace
