#include <atomic>
#include <cstdlib>
#include <string>

#include "lsgnn/error.hpp"
#include "lsgnn/kernels.hpp"

namespace lsgnn::kernels {
namespace {

const Table* table_for(Level level) noexcept {
    switch (level) {
    case Level::scalar:
        return &scalar_table();
    case Level::avx2:
#if defined(LSGNN_HAVE_AVX2)
        if (__builtin_cpu_supports("avx2")) return avx2_table();
#endif
        return nullptr;
    case Level::neon:
#if defined(LSGNN_HAVE_NEON)
        return neon_table();
#else
        return nullptr;
#endif
    }
    return nullptr;
}

const Table* detect() noexcept {
    if (const char* env = std::getenv("LSGNN_SIMD")) {
        const std::string want(env);
        if (want == "scalar") return &scalar_table();
        if (want == "avx2" && table_for(Level::avx2)) return table_for(Level::avx2);
        if (want == "neon" && table_for(Level::neon)) return table_for(Level::neon);
    }
    if (const Table* t = table_for(Level::avx2)) return t;
    if (const Table* t = table_for(Level::neon)) return t;
    return &scalar_table();
}

std::atomic<const Table*> g_active{nullptr};

} // namespace

const Table& active() noexcept {
    const Table* t = g_active.load(std::memory_order_acquire);
    if (t == nullptr) {
        t = detect();
        g_active.store(t, std::memory_order_release);
    }
    return *t;
}

void force(Level level) {
    const Table* t = table_for(level);
    if (t == nullptr) {
        throw InputError("kernel level '" + std::string(name(level)) + "' not supported on this CPU");
    }
    g_active.store(t, std::memory_order_release);
}

bool supported(Level level) noexcept { return table_for(level) != nullptr; }

std::string_view name(Level level) noexcept {
    switch (level) {
    case Level::scalar: return "scalar";
    case Level::avx2: return "avx2";
    case Level::neon: return "neon";
    }
    return "unknown";
}

} // namespace lsgnn::kernels
