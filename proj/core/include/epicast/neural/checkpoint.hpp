#pragma once

#include <filesystem>
#include <iosfwd>

#include "epicast/neural/network.hpp"

namespace epicast::neural {

/*
 * Text checkpoint, version 1. Line-oriented, whitespace-separated:
 *
 *   epicast-network 1
 *   architecture <vanilla|stacked|bidirectional|cnn_lstm|conv_lstm>
 *   config <n_s> <n_n> <n_f> <kernel_size> <pool_size> <subsequences> <learning_rate> <epochs> <seed>
 *   scaling <last_value|none>
 *   tensors <count>
 *   tensor <name> <rank> <dim_0> ... <dim_rank-1>
 *   <values, row-major, %.17g, one line>
 *   ...
 *   end
 *
 * Values are printed with 17 significant digits, so a load reproduces the weights bit-exactly.
 */
void write_checkpoint(std::ostream& out, const NetworkModel& model);
[[nodiscard]] NetworkModel read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const NetworkModel& model);
[[nodiscard]] NetworkModel load_checkpoint(const std::filesystem::path& path);

}  // namespace epicast::neural
