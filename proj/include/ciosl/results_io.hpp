#pragma once

#include <fstream>
#include <mutex>
#include <string>

#include "json.hpp"

namespace ciosl {

// Line-delimited JSON results file: a header line, one event line per
// testing event as it completes (the crash-resumable audit trail), and a
// final summary line. A file without the summary line is an aborted run.
class ResultsWriter {
 public:
  explicit ResultsWriter(const std::string& path);

  void write_line(const nlohmann::json& obj);

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::mutex mutex_;
};

struct ResultsFile {
  nlohmann::json header;
  std::vector<nlohmann::json> events;
  nlohmann::json summary;  // null when the run never completed
  std::string summary_line;  // raw bytes of the summary line
};

ResultsFile read_results(const std::string& path);

}  // namespace ciosl
