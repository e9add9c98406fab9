#pragma once

// Shared helpers for the unit tests: scratch directories, seeded random data
// and a small process runner for the command-line driver.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "lagrom/lagrom.hpp"

namespace lagrom::testing {

/// Fresh per-test directory under the system temp path, removed on destruction.
class ScratchDir {
public:
    ScratchDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        std::string name = std::string("lagrom_") + info->test_suite_name() + "_" + info->name();
        for (char& c : name) {
            if (c == '/') c = '_';
        }
        path_ = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline Mat random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Mat m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(gen);
    }
    return m;
}

inline Vec random_vector(Eigen::Index n, std::uint64_t seed) { return random_matrix(n, 1, seed).col(0); }

/// Random orthonormal n x r matrix.
inline Mat random_orthonormal(Eigen::Index n, Eigen::Index r, std::uint64_t seed) {
    Eigen::HouseholderQR<Mat> qr(random_matrix(n, r, seed));
    return qr.householderQ() * Mat::Identity(n, r);
}

/// Trapezoid-free discrete L2 norm scaled by the grid spacing.
inline double grid_l2(const Vec& v, double h) { return v.norm() * std::sqrt(h); }

/// log2 ratio of successive errors (observed order under halving).
inline double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

struct CliResult {
    int code = -1;
    std::string output;
};

#ifdef LAGROM_CLI_PATH
/// Runs the driver with `args`, capturing stdout and stderr.
inline CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(LAGROM_CLI_PATH) + " " + args + " 2>&1";
    CliResult r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    char buf[512];
    while (std::fgets(buf, sizeof buf, pipe) != nullptr) r.output += buf;
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}
#endif

}  // namespace lagrom::testing
