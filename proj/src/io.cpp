#include "ssplsc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <limits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ssplsc {

namespace fs = std::filesystem;

void atomic_write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_recording_csv(const fs::path& path, const Recording& rec) {
    std::ostringstream out;
    for (Eigen::Index c = 0; c < rec.channels(); ++c) {
        if (c) out << ',';
        out << (static_cast<std::size_t>(c) < rec.channel_labels.size()
                    ? rec.channel_labels[static_cast<std::size_t>(c)]
                    : "ch" + std::to_string(c));
    }
    out << "\r\n";
    for (Eigen::Index r = 0; r < rec.samples.rows(); ++r) {
        for (Eigen::Index c = 0; c < rec.samples.cols(); ++c) {
            if (c) out << ',';
            out << format_double(rec.samples(r, c));
        }
        out << "\r\n";
    }
    atomic_write_file(path, out.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else if (ch != '\r') {
            field += ch;
        }
    }
    fields.push_back(field);
    return fields;
}

}  // namespace

Recording read_recording_csv(const fs::path& path, double sampling_rate,
                             double trial_length) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty file: " + path.string());

    Recording rec;
    rec.sampling_rate = sampling_rate;
    rec.trial_length = trial_length;
    rec.channel_labels = split_csv_line(line);
    const std::size_t n_ch = rec.channel_labels.size();

    std::vector<double> values;
    std::size_t n_rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != n_ch)
            throw IoError(path.string() + ": row " + std::to_string(n_rows + 2) +
                          " has " + std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(n_ch));
        for (const auto& f : fields) {
            double v;
            const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (res.ec != std::errc{})
                throw IoError(path.string() + ": bad number '" + f + "'");
            values.push_back(v);
        }
        ++n_rows;
    }
    rec.samples.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_ch));
    for (std::size_t r = 0; r < n_rows; ++r)
        for (std::size_t c = 0; c < n_ch; ++c)
            rec.samples(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                values[r * n_ch + c];
    return rec;
}

json sim_config_to_json(const SimConfig& c) {
    json j;
    j["n_subjects"] = c.n_subjects;
    j["eeg_channels"] = c.eeg_channels;
    j["emg_channels"] = c.emg_channels;
    j["trials_per_subject"] = c.trials_per_subject;
    j["trial_length"] = c.trial_length;
    j["sampling_rate"] = c.sampling_rate;
    j["snr_eeg"] = c.snr_eeg;
    j["snr_emg"] = c.snr_emg;
    j["coupling_lo"] = c.coupling_lo;
    j["coupling_hi"] = c.coupling_hi;
    j["active_eeg_fraction"] = c.active_eeg_fraction;
    j["active_emg_fraction"] = c.active_emg_fraction;
    j["eeg_pink_noise"] = c.eeg_pink_noise;
    j["seed"] = c.seed;
    return j;
}

SimConfig sim_config_from_json(const json& j) {
    SimConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("n_subjects", c.n_subjects);
    get("eeg_channels", c.eeg_channels);
    get("emg_channels", c.emg_channels);
    get("trials_per_subject", c.trials_per_subject);
    get("trial_length", c.trial_length);
    get("sampling_rate", c.sampling_rate);
    get("snr_eeg", c.snr_eeg);
    get("snr_emg", c.snr_emg);
    get("coupling_lo", c.coupling_lo);
    get("coupling_hi", c.coupling_hi);
    get("active_eeg_fraction", c.active_eeg_fraction);
    get("active_emg_fraction", c.active_emg_fraction);
    get("eeg_pink_noise", c.eeg_pink_noise);
    get("seed", c.seed);
    return c;
}

namespace {

std::string subject_dir_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "subject_%03d", index);
    return buf;
}

}  // namespace

void write_dataset(const fs::path& dir, const SyntheticDataset& dataset) {
    fs::create_directories(dir);
    for (std::size_t s = 0; s < dataset.eeg.size(); ++s) {
        const fs::path subj = dir / subject_dir_name(static_cast<int>(s));
        fs::create_directories(subj);
        write_recording_csv(subj / "eeg.csv", dataset.eeg[s]);
        write_recording_csv(subj / "emg.csv", dataset.emg[s]);
        json meta;
        meta["subject_id"] = subject_dir_name(static_cast<int>(s));
        meta["sampling_rate"] = dataset.config.sampling_rate;
        meta["trial_length"] = dataset.config.trial_length;
        atomic_write_file(subj / "meta.json", meta.dump(2) + "\n");
    }

    json gt;
    gt["config"] = sim_config_to_json(dataset.config);
    gt["coupling_bins"] = dataset.coupling_bins;
    gt["subjects"] = json::array();
    for (const auto& sub : dataset.ground_truth) {
        json s;
        s["eeg_active"] = sub.eeg_active;
        s["emg_active"] = sub.emg_active;
        s["eeg_weights"] = eigen_to_json(sub.eeg_weights);
        s["emg_weights"] = eigen_to_json(sub.emg_weights);
        s["eeg_bump_center"] = sub.eeg_bump_center;
        s["emg_bump_center"] = sub.emg_bump_center;
        gt["subjects"].push_back(std::move(s));
    }
    atomic_write_file(dir / "ground_truth.json", gt.dump(2) + "\n");
}

std::vector<SubjectData> read_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> subject_dirs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory() && fs::exists(entry.path() / "meta.json"))
            subject_dirs.push_back(entry.path());
    std::sort(subject_dirs.begin(), subject_dirs.end());
    if (subject_dirs.empty())
        throw IoError("no subject directories under " + dir.string());

    std::vector<SubjectData> out;
    for (const auto& subj : subject_dirs) {
        std::ifstream meta_in(subj / "meta.json");
        if (!meta_in) throw IoError("cannot open " + (subj / "meta.json").string());
        json meta = json::parse(meta_in);
        SubjectData data;
        data.subject_id = meta.value("subject_id", subj.filename().string());
        const double sr = meta.at("sampling_rate").get<double>();
        const double tl = meta.at("trial_length").get<double>();
        data.eeg = read_recording_csv(subj / "eeg.csv", sr, tl);
        data.emg = read_recording_csv(subj / "emg.csv", sr, tl);
        out.push_back(std::move(data));
    }
    return out;
}

std::string config_hash(const json& config) {
    const std::string dump = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

json vector_to_json(const std::vector<double>& v) {
    json j = json::array();
    for (double x : v)
        if (std::isfinite(x))
            j.push_back(x);
        else
            j.push_back(nullptr);
    return j;
}

std::vector<double> vector_from_json(const json& j) {
    std::vector<double> v;
    for (const auto& item : j)
        v.push_back(item.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                   : item.get<double>());
    return v;
}

json eigen_to_json(const Eigen::VectorXd& v) {
    json j = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

Eigen::VectorXd eigen_from_json(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    Eigen::Index i = 0;
    for (const auto& item : j) v[i++] = item.get<double>();
    return v;
}

}  // namespace ssplsc
