#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "facexai/llm_client.hpp"
#include "facexai_cli/config.hpp"

namespace facexai::cli {

struct CommandOptions {
  int jobs = 1;
  std::ostream* log = nullptr;              // progress lines; null: silent
  std::shared_ptr<Transport> transport;     // null: HTTP
};

// Each command writes its artifacts and run.json under config.output.
void extract_concepts(const RunConfig& config, const CommandOptions& options);
void explain_pair(const RunConfig& config, const CommandOptions& options);
void evaluate(const RunConfig& config, const CommandOptions& options);
// Explains every pair of the dataset and writes index.md.
void report(const RunConfig& config, const CommandOptions& options);

// Contents of run.json.
nlohmann::json run_record(const RunConfig& config, Command command);

// Full command line: argv without the program name. Returns the exit code
// (0 success, 2 validation error, 3 runtime error).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            std::shared_ptr<Transport> transport = nullptr);

}  // namespace facexai::cli
