#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace htrace::testing {

struct FixtureFiles {
  std::filesystem::path dir;
  std::filesystem::path corpus;
  std::filesystem::path predictions;
  std::filesystem::path predictions_alt;
  std::filesystem::path embeddings;
  std::filesystem::path surveys;
  std::filesystem::path keys;
  std::filesystem::path config;
};

// Writes a small, valid input set (12 annotators, 6 examples each, 3 of
// them copiers) under `dir`, replacing whatever was there.
FixtureFiles write_fixture(const std::filesystem::path& dir);

// Every subcommand with arguments that succeed on the fixture. Outputs go
// to `out_dir`.
std::vector<std::vector<std::string>> fixture_invocations(const FixtureFiles& f,
                                                          const std::filesystem::path& out_dir);

std::string read_text(const std::filesystem::path& path);

}  // namespace htrace::testing
