#include "sarange/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sarange/error.hpp"
#include "sarange/report.hpp"
#include "sarange/rng.hpp"

namespace sarange {

Dataset sample_dataset(const Objective& f, const BoxDomain& domain,
                       std::size_t m, double noise_sd, std::uint64_t seed) {
  require(m >= 1, "dataset size m must be at least 1");
  require(noise_sd >= 0.0 && std::isfinite(noise_sd),
          "noise_sd must be finite and non-negative");
  require_dimension(f.dim(), domain.dim(), "sample_dataset");

  Dataset data;
  data.dim = domain.dim();
  data.inputs.reserve(m * data.dim);
  data.targets.reserve(m);
  data.meta = {f.name(), noise_sd, seed, domain};

  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    const Point x = sample_uniform(domain, rng);
    // One noise draw per row, even at zero noise, keeps the input stream
    // independent of noise_sd.
    const double eps = noise(rng);
    data.inputs.insert(data.inputs.end(), x.begin(), x.end());
    data.targets.push_back(f(x) + noise_sd * eps);
  }
  return data;
}

std::string dataset_csv(const Dataset& data) {
  std::string out;
  for (std::size_t j = 0; j < data.dim; ++j) {
    out += "x" + std::to_string(j + 1) + ",";
  }
  out += "target\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.input(i)) {
      append_number(out, v);
      out += ',';
    }
    append_number(out, data.targets[i]);
    out += '\n';
  }
  return out;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  write_text_file(path, dataset_csv(data));
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open dataset " + path.string());

  auto fail = [&](std::size_t line_no, const std::string& what) {
    return Error(ErrorCode::parse, path.string() + ":" +
                                       std::to_string(line_no) + ": " + what);
  };

  std::string line;
  if (!std::getline(in, line)) throw fail(1, "missing header");
  const auto header = split_commas(line);
  if (header.size() < 2 || header.back() != "target") {
    throw fail(1, "header must be x1,...,xd,target");
  }
  Dataset data;
  data.dim = header.size() - 1;
  for (std::size_t j = 0; j < data.dim; ++j) {
    if (header[j] != "x" + std::to_string(j + 1)) {
      throw fail(1, "unexpected column '" + std::string(header[j]) + "'");
    }
  }
  data.meta.source = path.filename().string();

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != data.dim + 1) {
      throw fail(line_no, "expected " + std::to_string(data.dim + 1) +
                              " fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      double v = 0.0;
      const auto* first = fields[j].data();
      const auto* last = first + fields[j].size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last) {
        throw fail(line_no, "bad number '" + std::string(fields[j]) + "'");
      }
      if (j < data.dim) {
        data.inputs.push_back(v);
      } else {
        data.targets.push_back(v);
      }
    }
  }
  if (data.size() == 0) throw fail(line_no, "dataset has no rows");
  return data;
}

}  // namespace sarange
