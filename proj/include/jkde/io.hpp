#pragma once

#include "dataset.hpp"
#include "error.hpp"
#include "estimator.hpp"
#include "kernels.hpp"
#include "noise.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace jkde::io {

enum class ColumnKind
{
  discrete,
  continuous
};

//! Columns to read from a CSV file, in the order they should appear in the
//! dataset (within each kind).
struct DatasetSchema
{
  std::vector<std::string> names;
  std::vector<ColumnKind> kinds;

  void add(std::string name, ColumnKind kind)
  {
    names.push_back(std::move(name));
    kinds.push_back(kind);
  }
};

inline std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_int(std::string_view s, std::int64_t& out)
{
  s = trim(s);
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && !s.empty();
}

inline bool parse_double(std::string_view s, double& out)
{
  s = trim(s);
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && !s.empty() && std::isfinite(out);
}

//! Reads a headed CSV file into a dataset. Columns not named in the schema
//! are ignored; blank lines are skipped.
inline MixedDataset parse_dataset(std::istream& in, const DatasetSchema& schema)
{
  if (schema.names.empty())
    throw DataError("schema has no columns");
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      header = split(line, ',');
      break;
    }
  }
  if (header.empty())
    throw DataError("empty file");

  std::vector<std::size_t> disc_idx, cont_idx;
  std::vector<std::string> disc_names, cont_names;
  for (std::size_t c = 0; c < schema.names.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), schema.names[c]);
    if (it == header.end())
      throw DataError("missing column '" + schema.names[c] + "'");
    const auto idx = static_cast<std::size_t>(it - header.begin());
    if (schema.kinds[c] == ColumnKind::discrete) {
      disc_idx.push_back(idx);
      disc_names.push_back(schema.names[c]);
    } else {
      cont_idx.push_back(idx);
      cont_names.push_back(schema.names[c]);
    }
  }

  std::vector<std::int64_t> z;
  std::vector<double> x;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty())
      continue;
    ++row;
    const auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw DataError("row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(cells.size()));
    for (std::size_t k = 0; k < disc_idx.size(); ++k) {
      std::int64_t v = 0;
      if (!parse_int(cells[disc_idx[k]], v))
        throw DataError("row " + std::to_string(row) + ", column '" + disc_names[k] +
                        "': '" + cells[disc_idx[k]] + "' is not an integer");
      z.push_back(v);
    }
    for (std::size_t j = 0; j < cont_idx.size(); ++j) {
      double v = 0.0;
      if (!parse_double(cells[cont_idx[j]], v))
        throw DataError("row " + std::to_string(row) + ", column '" + cont_names[j] +
                        "': '" + cells[cont_idx[j]] + "' is not a finite number");
      x.push_back(v);
    }
  }
  if (row == 0)
    throw DataError("empty dataset");
  return MixedDataset(disc_idx.size(), cont_idx.size(), std::move(z), std::move(x),
                      std::move(disc_names), std::move(cont_names));
}

inline MixedDataset parse_dataset(const std::filesystem::path& path,
                                  const DatasetSchema& schema)
{
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open '" + path.string() + "'");
  return parse_dataset(in, schema);
}

//! Reads just the header row of a CSV file.
inline std::vector<std::string> read_header(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  while (std::getline(in, line))
    if (!trim(line).empty())
      return split(line, ',');
  throw DataError("empty file");
}

//! Schema with the named columns discrete and every other column continuous.
inline DatasetSchema schema_from_header(const std::vector<std::string>& header,
                                        const std::vector<std::string>& discrete)
{
  for (const auto& d : discrete)
    if (std::find(header.begin(), header.end(), d) == header.end())
      throw DataError("missing column '" + d + "'");
  DatasetSchema schema;
  for (const auto& name : header) {
    const bool is_disc = std::find(discrete.begin(), discrete.end(), name) != discrete.end();
    schema.add(name, is_disc ? ColumnKind::discrete : ColumnKind::continuous);
  }
  return schema;
}

// grid specifications ---------------------------------------------------------

namespace detail {

inline std::vector<double> parse_real_axis(const std::string& name, const std::string& spec)
{
  auto fail = [&] {
    return DataError("grid axis '" + name + "': cannot parse '" + spec + "'");
  };
  std::vector<double> out;
  if (spec.find(':') == std::string::npos) {
    for (const auto& tok : split(spec, ',')) {
      double v = 0.0;
      if (!parse_double(tok, v))
        throw fail();
      out.push_back(v);
    }
    return out;
  }
  const auto parts = split(spec, ':');
  double a = 0.0, step = 1.0, b = 0.0;
  if (parts.size() == 2) {
    if (!parse_double(parts[0], a) || !parse_double(parts[1], b))
      throw fail();
  } else if (parts.size() == 3) {
    if (!parse_double(parts[0], a) || !parse_double(parts[1], step) ||
        !parse_double(parts[2], b))
      throw fail();
  } else {
    throw fail();
  }
  if (!(step > 0.0) || b < a)
    throw DataError("grid axis '" + name + "': range must be increasing with a positive step");
  const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(a + step * static_cast<double>(i));
  return out;
}

inline std::vector<std::int64_t> parse_int_axis(const std::string& name,
                                                const std::string& spec)
{
  auto fail = [&] {
    return DataError("grid axis '" + name + "': '" + spec +
                     "' is not an integer list or range");
  };
  std::vector<std::int64_t> out;
  if (spec.find(':') == std::string::npos) {
    for (const auto& tok : split(spec, ',')) {
      std::int64_t v = 0;
      if (!parse_int(tok, v))
        throw fail();
      out.push_back(v);
    }
    return out;
  }
  const auto parts = split(spec, ':');
  std::int64_t a = 0, step = 1, b = 0;
  if (parts.size() == 2) {
    if (!parse_int(parts[0], a) || !parse_int(parts[1], b))
      throw fail();
  } else if (parts.size() == 3) {
    if (!parse_int(parts[0], a) || !parse_int(parts[1], step) || !parse_int(parts[2], b))
      throw fail();
  } else {
    throw fail();
  }
  if (step <= 0 || b < a)
    throw DataError("grid axis '" + name + "': range must be increasing with a positive step");
  for (std::int64_t v = a; v <= b; v += step)
    out.push_back(v);
  return out;
}

} // namespace detail

//! Parses "name=spec;name=spec;..." where spec is a value list "a,b,c", an
//! integer-step range "a:b", or a stepped range "a:step:b". Every column of
//! the dataset needs exactly one axis.
inline GridSpec parse_grid(const std::string& text,
                           const std::vector<std::string>& discrete_names,
                           const std::vector<std::string>& continuous_names)
{
  std::map<std::string, std::string> axes;
  for (const auto& part : split(text, ';')) {
    if (part.empty())
      continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos)
      throw DataError("grid entry '" + part + "' is not of the form name=spec");
    const std::string name(trim(std::string_view(part).substr(0, eq)));
    if (!axes.emplace(name, std::string(trim(std::string_view(part).substr(eq + 1)))).second)
      throw DataError("grid axis '" + name + "' given twice");
  }
  if (axes.empty())
    throw DataError("empty grid");

  GridSpec grid;
  std::size_t used = 0;
  for (const auto& name : discrete_names) {
    auto it = axes.find(name);
    if (it == axes.end())
      throw DataError("grid is missing axis '" + name + "'");
    grid.z_axes.push_back(detail::parse_int_axis(name, it->second));
    ++used;
  }
  for (const auto& name : continuous_names) {
    auto it = axes.find(name);
    if (it == axes.end())
      throw DataError("grid is missing axis '" + name + "'");
    grid.x_axes.push_back(detail::parse_real_axis(name, it->second));
    ++used;
  }
  if (used != axes.size())
    throw DataError("grid names a column that is not in the model");
  for (const auto& a : grid.z_axes)
    if (a.empty())
      throw DataError("empty grid axis");
  for (const auto& a : grid.x_axes)
    if (a.empty())
      throw DataError("empty grid axis");
  return grid;
}

// model persistence -----------------------------------------------------------

inline constexpr const char* model_format = "jkde-model";
inline constexpr int model_version = 1;

//! JSON document for a fitted model. The dataset itself is referenced by
//! path; the jitter matrix is stored in full (doubles round-trip exactly).
inline nlohmann::json model_to_json(const JKDEModel& model,
                                    const std::filesystem::path& dataset_path)
{
  const auto& data = model.data();
  nlohmann::json jitter = nlohmann::json::array();
  for (std::size_t i = 0; i < data.n(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t k = 0; k < data.p(); ++k)
      row.push_back(model.jitter(i, k));
    jitter.push_back(std::move(row));
  }
  return {
    { "format", model_format },
    { "version", model_version },
    { "dataset",
      { { "path", dataset_path.string() },
        { "n", data.n() },
        { "discrete", data.discrete_names() },
        { "continuous", data.continuous_names() } } },
    { "seed", model.seed() },
    { "kernel",
      { { "family", to_string(model.kernel().family) },
        { "order", model.kernel().order } } },
    { "noise",
      { { "shape", to_string(model.noise().shape) },
        { "gamma1", model.noise().gamma1 },
        { "gamma2", model.noise().gamma2 } } },
    { "bandwidths",
      { { "h", model.bandwidths().h }, { "b", model.bandwidths().b } } },
    { "jitter", std::move(jitter) },
  };
}

//! Rebuilds a model from its JSON document, reading the referenced dataset.
//! A relative dataset path is resolved against `base_dir`.
inline JKDEModel model_from_json(const nlohmann::json& doc,
                                 const std::filesystem::path& base_dir = {})
{
  try {
    if (doc.at("format").get<std::string>() != model_format)
      throw DataError("not a jkde model document");
    if (doc.at("version").get<int>() != model_version)
      throw DataError("unsupported model version");
    const auto& ds = doc.at("dataset");
    std::filesystem::path path = ds.at("path").get<std::string>();
    if (path.is_relative() && !base_dir.empty())
      path = base_dir / path;
    DatasetSchema schema;
    for (const auto& name : ds.at("discrete").get<std::vector<std::string>>())
      schema.add(name, ColumnKind::discrete);
    for (const auto& name : ds.at("continuous").get<std::vector<std::string>>())
      schema.add(name, ColumnKind::continuous);
    auto data = parse_dataset(path, schema);
    if (data.n() != ds.at("n").get<std::size_t>())
      throw DataError("dataset '" + path.string() + "' has " + std::to_string(data.n()) +
                      " rows, model expects " + std::to_string(ds.at("n").get<std::size_t>()));

    KernelSpec kernel(kernel_family_from_string(doc.at("kernel").at("family").get<std::string>()),
                      doc.at("kernel").at("order").get<int>());
    NoiseSpec noise{ noise_shape_from_string(doc.at("noise").at("shape").get<std::string>()),
                     doc.at("noise").at("gamma1").get<double>(),
                     doc.at("noise").at("gamma2").get<double>() };
    Bandwidths bw{ doc.at("bandwidths").at("h").get<std::vector<double>>(),
                   doc.at("bandwidths").at("b").get<std::vector<double>>() };
    std::vector<double> jitter;
    const auto& rows = doc.at("jitter");
    if (rows.size() != data.n())
      throw DataError("jitter matrix has wrong number of rows");
    for (const auto& row : rows) {
      if (row.size() != data.p())
        throw DataError("jitter matrix has wrong number of columns");
      for (const auto& v : row)
        jitter.push_back(v.get<double>());
    }
    return JKDEModel(std::move(data), std::move(jitter), kernel, noise, std::move(bw),
                     doc.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid model document: ") + e.what());
  }
}

inline JKDEModel load_model(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return model_from_json(doc, path.parent_path());
}

//! printf-style formatting into a std::string.
template <typename... Args>
std::string format(const char* fmt, Args... args)
{
  const int len = std::snprintf(nullptr, 0, fmt, args...);
  std::string out(static_cast<std::size_t>(len), '\0');
  std::snprintf(out.data(), out.size() + 1, fmt, args...);
  return out;
}

//! CSV with one row per grid node: discrete coordinates, continuous
//! coordinates, value.
inline void write_grid_csv(std::ostream& out,
                           const GridSpec& grid,
                           const GridTensor& values,
                           const std::vector<std::string>& discrete_names,
                           const std::vector<std::string>& continuous_names,
                           const std::string& value_name = "density")
{
  for (const auto& name : discrete_names)
    out << name << ',';
  for (const auto& name : continuous_names)
    out << name << ',';
  out << value_name << '\n';
  std::vector<std::int64_t> z;
  std::vector<double> x;
  for (std::size_t i = 0; i < values.values.size(); ++i) {
    grid.node(i, z, x);
    for (auto v : z)
      out << v << ',';
    for (auto v : x)
      out << format("%.10g", v) << ',';
    out << format("%.17g", values.values[i]) << '\n';
  }
}

} // namespace jkde::io
