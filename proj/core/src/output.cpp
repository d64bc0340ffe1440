#include "kvflow/output.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#ifndef KVFLOW_VERSION
#define KVFLOW_VERSION "unknown"
#endif

namespace kvflow {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_doubles(std::ostream& out, const Array3& a) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)));
  } else {
    for (double x : a.values()) {
      auto bits = std::bit_cast<std::uint64_t>(x);
      unsigned char b[8];
      for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
      out.write(reinterpret_cast<const char*>(b), 8);
    }
  }
}

void read_doubles(std::istream& in, Array3& a, const std::string& path) {
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)));
  } else {
    for (double& x : a.values()) {
      unsigned char b[8];
      in.read(reinterpret_cast<char*>(b), 8);
      std::uint64_t bits = 0;
      for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
      x = std::bit_cast<double>(bits);
    }
  }
  if (!in) throw std::runtime_error("checkpoint: '" + path + "' is truncated");
}

std::string field_line(const std::string& name, const Array3& a) {
  const Index3& s = a.shape();
  return "checkpoint.field = " + name + " " + std::to_string(a.stagger().mask) + " " + std::to_string(s[0]) + " " +
         std::to_string(s[1]) + " " + std::to_string(s[2]) + "\n";
}

}  // namespace

std::string csv_header(bool with_tke) {
  std::string h = "step,t,E,dissipation_cum,work_cum,balance_residual,div_max,picard_iters";
  if (with_tke) h += ",k_total,production,dissipation_k,clipped_mass,transfer_ok";
  return h;
}

std::string format_csv_row(const CsvRow& row) {
  std::string s = std::to_string(row.step) + "," + fmt(row.t) + "," + fmt(row.energy) + "," +
                  fmt(row.dissipation_cum) + "," + fmt(row.work_cum) + "," + fmt(row.balance_residual) + "," +
                  fmt(row.div_max) + "," + std::to_string(row.picard_iters);
  if (row.tke)
    s += "," + fmt(row.tke->k_total) + "," + fmt(row.tke->production) + "," + fmt(row.tke->dissipation_k) + "," +
         fmt(row.tke->clipped_mass) + "," + (row.tke->transfer_ok ? "1" : "0");
  return s;
}

CsvWriter::CsvWriter(const std::string& path, bool with_tke, std::size_t capacity)
    : out_(path, std::ios::binary | std::ios::trunc), with_tke_(with_tke), capacity_(std::max<std::size_t>(1, capacity)) {
  if (!out_) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
  out_ << csv_header(with_tke_) << '\n';
  worker_ = std::thread([this] { run(); });
}

CsvWriter::~CsvWriter() {
  try {
    close();
  } catch (...) {
  }
}

void CsvWriter::push(CsvRow row) {
  if (row.tke.has_value() != with_tke_) throw std::logic_error("csv: row does not match the header");
  std::unique_lock lock(mutex_);
  if (closing_) throw std::logic_error("csv: push after close");
  not_full_.wait(lock, [this] { return queue_.size() < capacity_; });
  queue_.push_back(std::move(row));
  not_empty_.notify_one();
}

void CsvWriter::run() {
  for (;;) {
    CsvRow row;
    {
      std::unique_lock lock(mutex_);
      not_empty_.wait(lock, [this] { return !queue_.empty() || closing_; });
      if (queue_.empty()) return;
      row = std::move(queue_.front());
      queue_.pop_front();
      not_full_.notify_one();
    }
    if (!error_) {
      out_ << format_csv_row(row) << '\n';
      if (!out_) error_ = std::make_exception_ptr(std::runtime_error("csv: write failed"));
    }
  }
}

void CsvWriter::close() {
  {
    std::lock_guard lock(mutex_);
    if (closed_) return;
    closing_ = true;
    closed_ = true;
  }
  not_empty_.notify_all();
  if (worker_.joinable()) worker_.join();
  out_.flush();
  if (!out_ && !error_) error_ = std::make_exception_ptr(std::runtime_error("csv: flush failed"));
  out_.close();
  if (error_) std::rethrow_exception(error_);
}

void write_file_atomically(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

void save_checkpoint(const std::string& path, const RunConfig& cfg, const State& s, const ScalarField* k) {
  const int dim = s.v.grid()->dim();
  std::ostringstream head;
  head << "KVFLOW-CHECKPOINT " << kCheckpointVersion << "\n";
  head << "checkpoint.kind = " << (k ? "coupled" : "flow") << "\n";
  head << "checkpoint.t = " << fmt(s.t) << "\n";
  head << "checkpoint.step = " << s.step << "\n";
  head << echo_config(cfg);
  for (int d = 0; d < dim; ++d) head << field_line("v" + std::to_string(d), s.v.component(d));
  head << field_line("p", s.p.values());
  if (k) head << field_line("k", k->values());
  head << "end_header\n";

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open '" + tmp + "' for writing");
    out << head.str();
    for (int d = 0; d < dim; ++d) write_doubles(out, s.v.component(d));
    write_doubles(out, s.p.values());
    if (k) write_doubles(out, k->values());
    out.flush();
    if (!out) throw std::runtime_error("checkpoint: write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  const std::string magic = "KVFLOW-CHECKPOINT ";
  if (line.rfind(magic, 0) != 0) throw std::runtime_error("checkpoint: '" + path + "' is not a kvflow checkpoint");
  if (line.substr(magic.size()) != std::to_string(kCheckpointVersion))
    throw std::runtime_error("checkpoint: version " + line.substr(magic.size()) + " is not supported (expected " +
                             std::to_string(kCheckpointVersion) + ")");

  std::string config_text, kind;
  double t = 0.0;
  std::int64_t step = 0;
  struct FieldInfo {
    std::string name;
    int mask;
    Index3 shape;
  };
  std::vector<FieldInfo> fields;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end_header") {
      ended = true;
      break;
    }
    const auto eq = line.find(" = ");
    const std::string key = eq == std::string::npos ? line : line.substr(0, eq);
    const std::string value = eq == std::string::npos ? "" : line.substr(eq + 3);
    if (key == "checkpoint.kind") {
      kind = value;
    } else if (key == "checkpoint.t") {
      t = std::stod(value);
    } else if (key == "checkpoint.step") {
      step = std::stoll(value);
    } else if (key == "checkpoint.field") {
      std::istringstream ss(value);
      FieldInfo f;
      ss >> f.name >> f.mask >> f.shape[0] >> f.shape[1] >> f.shape[2];
      if (!ss) throw std::runtime_error("checkpoint: malformed field line '" + line + "'");
      fields.push_back(f);
    } else {
      config_text += line + "\n";
    }
  }
  if (!ended) throw std::runtime_error("checkpoint: '" + path + "' has no end_header");
  if (kind != "flow" && kind != "coupled") throw std::runtime_error("checkpoint: unknown kind '" + kind + "'");

  Checkpoint cp;
  cp.config = parse_config(config_text);
  const GridPtr grid = build_grid(cp.config.grid);
  cp.state.t = t;
  cp.state.step = step;
  cp.state.v = VectorField(grid);
  cp.state.p = ScalarField(grid, 0.0);
  if (kind == "coupled") cp.k = make_k_field(grid, 0.0);

  const int dim = grid->dim();
  const std::size_t expected = static_cast<std::size_t>(dim) + 1 + (cp.k ? 1 : 0);
  if (fields.size() != expected) throw std::runtime_error("checkpoint: unexpected number of fields");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    Array3* target = nullptr;
    if (static_cast<int>(i) < dim)
      target = &cp.state.v.component(static_cast<int>(i));
    else if (static_cast<int>(i) == dim)
      target = &cp.state.p.values();
    else
      target = &cp.k->values();
    const std::string want = static_cast<int>(i) < dim ? "v" + std::to_string(i)
                                                       : (static_cast<int>(i) == dim ? "p" : "k");
    if (fields[i].name != want || fields[i].mask != target->stagger().mask || fields[i].shape != target->shape())
      throw std::runtime_error("checkpoint: field '" + fields[i].name + "' does not match the grid");
    read_doubles(in, *target, path);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error("checkpoint: trailing data in '" + path + "'");
  return cp;
}

void RunSummary::flag(const std::string& name, bool ok) {
  for (auto& [n, v] : invariants)
    if (n == name) {
      v = v && ok;
      return;
    }
  invariants.emplace_back(name, ok);
}

void RunSummary::metric(const std::string& name, double value) {
  for (auto& [n, v] : metrics)
    if (n == name) {
      v = value;
      return;
    }
  metrics.emplace_back(name, value);
}

std::string summary_json(const RunSummary& summary) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["artifact"] = "kvflow";
  j["version"] = version();
  j["csv_schema"] = kCsvSchemaVersion;
  j["checkpoint_version"] = kCheckpointVersion;
  j["command"] = summary.command;
  j["passed"] = summary.passed;
  j["invariants"] = ordered_json::object();
  for (const auto& [name, ok] : summary.invariants) j["invariants"][name] = ok;
  j["metrics"] = ordered_json::object();
  for (const auto& [name, value] : summary.metrics) {
    if (std::isfinite(value))
      j["metrics"][name] = value;
    else
      j["metrics"][name] = fmt(value);
  }
  j["failure"] = summary.failure.empty() ? ordered_json(nullptr) : ordered_json(summary.failure);
  if (!summary.config_echo.empty()) {
    ordered_json config = ordered_json::object();
    ordered_json grid = ordered_json::object();
    std::istringstream in(summary.config_echo);
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(0, eq), value = line.substr(eq + 3);
      config[key] = value;
      if (key.rfind("grid.", 0) == 0) grid[key.substr(5)] = value;
    }
    j["grid"] = grid;
    j["config"] = config;
  }
  j["wall_clock_seconds"] = summary.wall_clock_seconds;
  return j.dump(2) + "\n";
}

void write_summary(const RunSummary& summary, const std::string& path) {
  write_file_atomically(path, summary_json(summary));
}

std::string version() { return KVFLOW_VERSION; }

}  // namespace kvflow
