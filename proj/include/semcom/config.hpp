#ifndef SEMCOM_CONFIG_HPP
#define SEMCOM_CONFIG_HPP

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "semcom/channel.hpp"
#include "semcom/codec.hpp"
#include "semcom/common.hpp"
#include "semcom/pipeline.hpp"
#include "semcom/task_model.hpp"
#include "semcom/training.hpp"

namespace semcom {

// `key = value` lines, '#' comments, dotted sections; everything the
// experiment harness can vary lives here.
class KeyValueConfig {
   public:
    static KeyValueConfig parse_string(const std::string& text) {
        KeyValueConfig cfg;
        std::istringstream in(text);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static KeyValueConfig parse_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw ConfigError("config: cannot open '" + path + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        return parse_string(ss.str());
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "inf") return kNoiselessSnrDb;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config: '" + key + "' is not a number: " + it->second);
        }
    }

    long long get_int(const std::string& key, long long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config: '" + key + "' is not an integer: " + it->second);
        }
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return std::stoull(it->second);
        } catch (const std::exception&) {
            throw ConfigError("config: '" + key + "' is not an unsigned integer: " + it->second);
        }
    }

    std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string t = trim(item);
            if (t.empty()) continue;
            try {
                out.push_back(std::stod(t));
            } catch (const std::exception&) {
                throw ConfigError("config: '" + key + "' has a non-numeric element: " + t);
            }
        }
        if (out.empty()) throw ConfigError("config: '" + key + "' is an empty list");
        return out;
    }

    const std::map<std::string, std::string>& values() const { return values_; }

   private:
    std::map<std::string, std::string> values_;

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }
};

inline ChannelKind parse_channel_kind(const std::string& s) {
    if (s == "awgn") return ChannelKind::awgn;
    if (s == "rayleigh_slow" || s == "rayleigh") return ChannelKind::rayleigh_slow;
    throw ConfigError("config: unknown channel kind '" + s + "'");
}

inline WeightModelKind parse_weight_model(const std::string& s) {
    if (s == "task") return WeightModelKind::task;
    if (s == "entropy") return WeightModelKind::entropy;
    throw ConfigError("config: unknown weight model '" + s + "'");
}

// Resolved experiment configuration with every default pinned.
struct ExperimentConfig {
    std::uint64_t master_seed = 1;

    int train_count = 768;
    int eval_count = 96;
    int task_count = 1280;
    int separation_count = 256;

    CodecConfig codec;
    TaskModelConfig task_model;

    // pretraining: noiseless masked reconstruction at ratio 0.75
    int pretrain_epochs = 24;
    int pretrain_batch = 16;
    double pretrain_lr = 1.5e-3;
    double pretrain_mask_ratio = 0.75;

    // channel fine-tuning: mask ratio and SNR drawn per batch
    int finetune_epochs = 14;
    int finetune_batch = 16;
    double finetune_lr = 5e-4;
    double finetune_mask_lo = 0.0;
    double finetune_mask_hi = 0.75;
    ChannelKind finetune_channel = ChannelKind::awgn;
    double finetune_snr_lo = 0.0;
    double finetune_snr_hi = 20.0;

    int task_epochs = 12;
    int task_batch = 16;
    double task_lr = 5e-3;
    double task_min_accuracy = 0.95;

    WeightModelKind weight_model = WeightModelKind::task;
    int stats_corpus_count = 256;

    // adaptive-rate policy defaults
    double rate_mu0 = 0.2;
    double rate_step = 0.05;

    // sweeps
    double sweep_l_snr_db = 15.0;
    ChannelKind sweep_l_channel = ChannelKind::awgn;
    int sweep_l_eval_count = 48;
    int sweep_l_replicates = 2;
    double sweep_l_eps = 0.01;

    std::vector<double> snr_grid{0.0, 3.0, 6.0, 9.0, 12.0, 15.0, 18.0};
    ChannelKind sweep_snr_channel = ChannelKind::rayleigh_slow;
    int sweep_snr_eval_count = 96;
    int sweep_snr_replicates = 3;
    double sweep_snr_mu = -1.0;  // < 0: auto-select so mean n <= l/2

    std::vector<double> mu_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    double sweep_mu_snr_db = 15.0;
    ChannelKind sweep_mu_channel = ChannelKind::rayleigh_slow;
    int sweep_mu_eval_count = 96;
    int sweep_mu_replicates = 3;

    double baseline_quality = 1.0;
    int jobs = 2;

    static ExperimentConfig from_kv(const KeyValueConfig& kv) {
        ExperimentConfig c;
        c.master_seed = kv.get_u64("master_seed", c.master_seed);
        c.train_count = static_cast<int>(kv.get_int("dataset.train_count", c.train_count));
        c.eval_count = static_cast<int>(kv.get_int("dataset.eval_count", c.eval_count));
        c.task_count = static_cast<int>(kv.get_int("dataset.task_count", c.task_count));
        c.separation_count = static_cast<int>(kv.get_int("dataset.separation_count", c.separation_count));

        c.codec.image_h = static_cast<int>(kv.get_int("codec.image_size", 32));
        c.codec.image_w = c.codec.image_h;
        c.codec.patch_size = static_cast<int>(kv.get_int("codec.patch_size", 4));
        c.codec.dim = static_cast<int>(kv.get_int("codec.dim", 64));
        c.codec.enc_blocks = static_cast<int>(kv.get_int("codec.enc_blocks", 4));
        c.codec.dec_blocks = static_cast<int>(kv.get_int("codec.dec_blocks", 2));
        c.codec.heads = static_cast<int>(kv.get_int("codec.heads", 4));
        c.codec.mlp_ratio = static_cast<int>(kv.get_int("codec.mlp_ratio", 4));
        c.codec.validate();
        c.task_model.image_h = c.codec.image_h;
        c.task_model.image_w = c.codec.image_w;

        c.pretrain_epochs = static_cast<int>(kv.get_int("pretrain.epochs", c.pretrain_epochs));
        c.pretrain_batch = static_cast<int>(kv.get_int("pretrain.batch", c.pretrain_batch));
        c.pretrain_lr = kv.get_double("pretrain.lr", c.pretrain_lr);
        c.pretrain_mask_ratio = kv.get_double("pretrain.mask_ratio", c.pretrain_mask_ratio);

        c.finetune_epochs = static_cast<int>(kv.get_int("finetune.epochs", c.finetune_epochs));
        c.finetune_batch = static_cast<int>(kv.get_int("finetune.batch", c.finetune_batch));
        c.finetune_lr = kv.get_double("finetune.lr", c.finetune_lr);
        c.finetune_mask_lo = kv.get_double("finetune.mask_ratio_lo", c.finetune_mask_lo);
        c.finetune_mask_hi = kv.get_double("finetune.mask_ratio_hi", c.finetune_mask_hi);
        c.finetune_channel = parse_channel_kind(kv.get_string("finetune.channel", "awgn"));
        c.finetune_snr_lo = kv.get_double("finetune.snr_lo_db", c.finetune_snr_lo);
        c.finetune_snr_hi = kv.get_double("finetune.snr_hi_db", c.finetune_snr_hi);

        c.task_epochs = static_cast<int>(kv.get_int("task.epochs", c.task_epochs));
        c.task_batch = static_cast<int>(kv.get_int("task.batch", c.task_batch));
        c.task_lr = kv.get_double("task.lr", c.task_lr);
        c.task_min_accuracy = kv.get_double("task.min_accuracy", c.task_min_accuracy);

        c.weight_model = parse_weight_model(kv.get_string("weight_model", "task"));
        c.stats_corpus_count = static_cast<int>(kv.get_int("stats.corpus_count", c.stats_corpus_count));

        c.rate_mu0 = kv.get_double("rate.mu0", c.rate_mu0);
        c.rate_step = kv.get_double("rate.step", c.rate_step);

        c.sweep_l_snr_db = kv.get_double("sweep_l.snr_db", c.sweep_l_snr_db);
        c.sweep_l_channel = parse_channel_kind(kv.get_string("sweep_l.channel", "awgn"));
        c.sweep_l_eval_count = static_cast<int>(kv.get_int("sweep_l.eval_count", c.sweep_l_eval_count));
        c.sweep_l_replicates = static_cast<int>(kv.get_int("sweep_l.replicates", c.sweep_l_replicates));
        c.sweep_l_eps = kv.get_double("sweep_l.eps", c.sweep_l_eps);

        c.snr_grid = kv.get_double_list("sweep_snr.grid_db", c.snr_grid);
        c.sweep_snr_channel = parse_channel_kind(kv.get_string("sweep_snr.channel", "rayleigh_slow"));
        c.sweep_snr_eval_count = static_cast<int>(kv.get_int("sweep_snr.eval_count", c.sweep_snr_eval_count));
        c.sweep_snr_replicates = static_cast<int>(kv.get_int("sweep_snr.replicates", c.sweep_snr_replicates));
        const std::string mu = kv.get_string("sweep_snr.mu", "auto");
        c.sweep_snr_mu = (mu == "auto") ? -1.0 : kv.get_double("sweep_snr.mu", -1.0);

        c.mu_grid = kv.get_double_list("sweep_mu.grid", c.mu_grid);
        c.sweep_mu_snr_db = kv.get_double("sweep_mu.snr_db", c.sweep_mu_snr_db);
        c.sweep_mu_channel = parse_channel_kind(kv.get_string("sweep_mu.channel", "rayleigh_slow"));
        c.sweep_mu_eval_count = static_cast<int>(kv.get_int("sweep_mu.eval_count", c.sweep_mu_eval_count));
        c.sweep_mu_replicates = static_cast<int>(kv.get_int("sweep_mu.replicates", c.sweep_mu_replicates));

        c.baseline_quality = kv.get_double("baseline.quality", c.baseline_quality);
        c.jobs = static_cast<int>(kv.get_int("jobs", c.jobs));
        if (c.jobs < 1) throw ConfigError("config: jobs must be >= 1");

        for (const auto& grid : {c.snr_grid, c.mu_grid})
            if (grid.empty()) throw ConfigError("config: sweep grids must be nonempty");
        return c;
    }

    static ExperimentConfig from_file(const std::string& path) {
        return from_kv(KeyValueConfig::parse_file(path));
    }
};

}  // namespace semcom

#endif
