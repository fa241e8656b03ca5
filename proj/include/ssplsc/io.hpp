#ifndef SSPLSC_IO_HPP
#define SSPLSC_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssplsc/simgen.hpp"
#include "ssplsc/spectra.hpp"

namespace ssplsc {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

// Writes content to path via a temp file + rename so readers never observe
// a partial file.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

std::string format_double(double v);  // 17 significant digits, round-trip safe

// Recording CSV: header row of channel labels, one row per time sample.
void write_recording_csv(const std::filesystem::path& path, const Recording& rec);
Recording read_recording_csv(const std::filesystem::path& path,
                             double sampling_rate, double trial_length);

struct SubjectData {
    std::string subject_id;
    Recording eeg;
    Recording emg;
};

// On-disk dataset layout:
//   <dir>/subject_NNN/{eeg.csv, emg.csv, meta.json}
//   <dir>/ground_truth.json   (simulated datasets only)
void write_dataset(const std::filesystem::path& dir, const SyntheticDataset& dataset);
std::vector<SubjectData> read_dataset(const std::filesystem::path& dir);

json sim_config_to_json(const SimConfig& config);
SimConfig sim_config_from_json(const json& j);

// FNV-1a over the canonical JSON dump; embedded in report provenance.
std::string config_hash(const json& config);

// NaN-tolerant numeric vectors (JSON null <-> NaN).
json vector_to_json(const std::vector<double>& v);
std::vector<double> vector_from_json(const json& j);
json eigen_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd eigen_from_json(const json& j);

}  // namespace ssplsc

#endif
