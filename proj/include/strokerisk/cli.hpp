#ifndef STROKERISK_CLI_HPP
#define STROKERISK_CLI_HPP

#include "strokerisk/cohort.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace strokerisk {

/// Entry point of the `strokerisk` tool. Returns 0 on success; otherwise
/// writes one line "error <kind>: <message>" to `err` and returns 1 (2 for
/// command-line usage errors).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

/// Reads a cohort CSV whose header may hold any subset of `schema` columns
/// (cleansing can drop some); the cohort keeps them in schema order. Header
/// names outside the schema are an error.
Cohort read_cohort(const std::filesystem::path& path, const FeatureSchema& schema, const CsvColumns& columns = {});

}  // namespace strokerisk

#endif  // STROKERISK_CLI_HPP
