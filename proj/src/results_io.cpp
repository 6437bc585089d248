#include "ciosl/results_io.hpp"

#include <stdexcept>

namespace ciosl {

ResultsWriter::ResultsWriter(const std::string& path)
    : path_(path), out_(path, std::ios::trunc) {
  if (!out_) {
    throw std::runtime_error("ResultsWriter: cannot open '" + path + "' for writing");
  }
}

void ResultsWriter::write_line(const nlohmann::json& obj) {
  std::lock_guard<std::mutex> lock(mutex_);
  out_ << obj.dump() << '\n';
  out_.flush();
}

ResultsFile read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_results: cannot open '" + path + "'");
  ResultsFile file;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json obj = nlohmann::json::parse(line);
    const std::string type = obj.value("type", "");
    if (type == "run_header") {
      file.header = obj;
    } else if (type == "summary") {
      file.summary = obj;
      file.summary_line = line;
    } else {
      file.events.push_back(std::move(obj));
    }
  }
  return file;
}

}  // namespace ciosl
