#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "kvflow/config.hpp"

namespace kvflow {

/// Version of the CSV column schema below.
inline constexpr int kCsvSchemaVersion = 1;

struct TkeColumns {
  double k_total = 0.0;
  double production = 0.0;
  double dissipation_k = 0.0;
  double clipped_mass = 0.0;
  bool transfer_ok = true;
};

/// One time-series row; the TKE columns appear only in coupled runs.
struct CsvRow {
  std::int64_t step = 0;
  double t = 0.0;
  double energy = 0.0;
  double dissipation_cum = 0.0;
  double work_cum = 0.0;
  double balance_residual = 0.0;
  double div_max = 0.0;
  int picard_iters = 0;
  std::optional<TkeColumns> tke;
};

/// step,t,E,dissipation_cum,work_cum,balance_residual,div_max,picard_iters
/// followed by k_total,production,dissipation_k,clipped_mass,transfer_ok when
/// `with_tke`.
std::string csv_header(bool with_tke);
/// Reals as %.17g, integers in decimal, transfer_ok as 0/1.
std::string format_csv_row(const CsvRow& row);

/// Writes rows on a background thread. push() blocks while `capacity` rows
/// are pending, so no row is ever dropped. close() flushes and rethrows the
/// first I/O error.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, bool with_tke, std::size_t capacity = 64);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void push(CsvRow row);
  void close();

 private:
  void run();

  std::ofstream out_;
  bool with_tke_;
  std::size_t capacity_;
  std::deque<CsvRow> queue_;
  std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  bool closing_ = false;
  bool closed_ = false;
  std::exception_ptr error_;
  std::thread worker_;
};

/// Writes `text` to a sibling temporary file and renames it into place.
void write_file_atomically(const std::string& path, const std::string& text);

/// Checkpoint layout:
///   KVFLOW-CHECKPOINT 1
///   checkpoint.kind = flow | coupled
///   checkpoint.t = <%.17g>
///   checkpoint.step = <n>
///   <echo_config lines>
///   checkpoint.field = <name> <stagger mask> <n0> <n1> <n2>   (one per field)
///   end_header
/// followed by the fields in header order as little-endian IEEE doubles, first
/// index fastest. Fields: v0..v{d-1}, p, and k for coupled checkpoints.
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  RunConfig config;
  State state;
  std::optional<ScalarField> k;
};

void save_checkpoint(const std::string& path, const RunConfig& cfg, const State& s, const ScalarField* k = nullptr);
Checkpoint load_checkpoint(const std::string& path);

/// Machine-readable result of one command.
struct RunSummary {
  std::string command;
  bool passed = false;
  /// Named invariants and whether they held.
  std::vector<std::pair<std::string, bool>> invariants;
  std::vector<std::pair<std::string, double>> metrics;
  /// Message of the failure that stopped the command, if any.
  std::string failure;
  /// echo_config text when the command ran from a config.
  std::string config_echo;
  double wall_clock_seconds = 0.0;

  void flag(const std::string& name, bool ok);
  void metric(const std::string& name, double value);
};

/// JSON object with the artifact version, CSV schema, invariants, metrics,
/// the grid and the config echo. Written atomically.
void write_summary(const RunSummary& summary, const std::string& path);
std::string summary_json(const RunSummary& summary);

/// Library version string.
std::string version();

}  // namespace kvflow
