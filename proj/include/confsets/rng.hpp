#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace confsets {

/// Engine behind every stochastic step. Streams are never shared: each
/// consumer gets its own engine seeded from derive_seed().
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Stable 64-bit key for a stream label (FNV-1a).
std::uint64_t stream_key(std::string_view label);

/// Child seed obtained by folding `keys` into `parent` with splitmix64. Used
/// to address independent sub-streams, e.g. (master, replicate, "cox-grid").
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> keys);

Eigen::MatrixXd standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace confsets
