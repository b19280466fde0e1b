#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "nsplat/run_record.hpp"

namespace nsplat {

// Chain files are comma-separated text (grammar in docs/chain_format.md):
//
//   logL,logL_birth,x0,...,x{D-1}
//   <death>,<birth>,<x0>,...
//
// Numbers are written in shortest round-trip form, -inf as `-inf`. Metadata
// lives in a `key=value` sidecar next to the chain (`<chain>.meta`).

enum class BirthPolicy {
  required,      // the logL_birth column must be present
  assume_prior,  // accept death-only chains; every birth becomes -inf
};

struct ReadOptions {
  BirthPolicy births = BirthPolicy::required;
};

// Shortest text that parses back to the same double.
std::string format_real(double v);
double parse_real(std::string_view cell, std::size_t row);

void write_chain(const RunRecord& run, std::ostream& out);
void write_meta(const RunMeta& meta, std::ostream& out);

RunMeta read_meta(std::istream& in);
RunRecord read_chain(std::istream& in, const RunMeta& meta, const ReadOptions& options = {});

std::filesystem::path meta_path_for(const std::filesystem::path& chain_path);

void save_run(const RunRecord& run, const std::filesystem::path& chain_path);
RunRecord load_run(const std::filesystem::path& chain_path, const ReadOptions& options = {});

}  // namespace nsplat
