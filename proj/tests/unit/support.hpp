#pragma once

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "wikimig/error.hpp"
#include "wikimig/timeseries.hpp"

namespace testing {

using wikimig::ErrorCode;
namespace ts = wikimig::ts;

/// Runs fn and returns the ErrorCode it raised; fails the test if nothing is raised.
template <class Fn>
ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const wikimig::Error& e) {
        return e.code();
    }
    FAIL("expected a wikimig::Error");
    return ErrorCode::Io;
}

inline ts::DailySeries daily(const std::string& label, ts::Day first, const std::vector<double>& values) {
    std::vector<ts::Point> pts;
    for (std::size_t i = 0; i < values.size(); ++i) pts.push_back({first + std::chrono::days{static_cast<int>(i)}, values[i]});
    return ts::DailySeries(label, pts);
}

inline std::vector<double> normals(std::mt19937_64& rng, std::size_t n, double sd = 1.0) {
    std::normal_distribution<double> d(0.0, sd);
    std::vector<double> out(n);
    for (auto& v : out) v = d(rng);
    return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("wikimig-test-" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace testing
