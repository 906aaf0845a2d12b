#include "stochdef/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace stochdef {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw std::invalid_argument("config " + where + ": " + msg);
}

void require_object(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        fail(where, "expected an object");
    }
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!keys.count(it.key())) {
            fail(where, "unknown key '" + it.key() + "'");
        }
    }
}

double get_real(const json& j, const std::string& where) {
    if (!j.is_number()) {
        fail(where, "expected a number");
    }
    return j.get<double>();
}

int get_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) {
        fail(where, "expected an integer");
    }
    return j.get<int>();
}

std::uint64_t get_u64(const json& j, const std::string& where) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
        fail(where, "expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& where) {
    if (!j.is_string()) {
        fail(where, "expected a string");
    }
    return j.get<std::string>();
}

template <class F>
void with(const json& j, const char* key, const std::string& where, F&& f) {
    auto it = j.find(key);
    if (it != j.end()) {
        f(*it, where + "." + key);
    }
}

RealRange get_real_range(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) {
        fail(where, "expected [lo, hi]");
    }
    return {get_real(j[0], where + "[0]"), get_real(j[1], where + "[1]")};
}

IntRange get_int_range(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) {
        fail(where, "expected [lo, hi]");
    }
    return {get_int(j[0], where + "[0]"), get_int(j[1], where + "[1]")};
}

json range_json(RealRange r) { return json::array({r.lo, r.hi}); }
json range_json(IntRange r) { return json::array({r.lo, r.hi}); }

PreprocessorSpec parse_spec(const json& j, const std::string& where) {
    require_object(j, where,
                   {"kind", "noise_sigma", "rotation_degrees", "injection_gaussian_std", "injection_salt_pepper",
                    "injection_speckle_std", "quantize_bins", "fft_fraction", "blur_kernel", "blur_sigma",
                    "median_kernel", "swirl_strength", "swirl_radius", "crop_size", "rescale_size", "pad_size",
                    "bart_kappa"});
    if (!j.contains("kind")) {
        fail(where, "missing 'kind'");
    }
    PreprocessorSpec s;
    try {
        s = PreprocessorSpec::of(transform_kind_from_string(get_string(j["kind"], where + ".kind")));
    } catch (const std::invalid_argument& e) {
        fail(where + ".kind", e.what());
    }
    with(j, "noise_sigma", where, [&](const json& v, const std::string& w) { s.noise_sigma = get_real(v, w); });
    with(j, "rotation_degrees", where,
         [&](const json& v, const std::string& w) { s.rotation_degrees = get_real_range(v, w); });
    with(j, "injection_gaussian_std", where,
         [&](const json& v, const std::string& w) { s.injection_gaussian_std = get_real_range(v, w); });
    with(j, "injection_salt_pepper", where,
         [&](const json& v, const std::string& w) { s.injection_salt_pepper = get_real_range(v, w); });
    with(j, "injection_speckle_std", where,
         [&](const json& v, const std::string& w) { s.injection_speckle_std = get_real_range(v, w); });
    with(j, "quantize_bins", where, [&](const json& v, const std::string& w) { s.quantize_bins = get_int_range(v, w); });
    with(j, "fft_fraction", where, [&](const json& v, const std::string& w) { s.fft_fraction = get_real_range(v, w); });
    with(j, "blur_kernel", where, [&](const json& v, const std::string& w) { s.blur_kernel = get_int_range(v, w); });
    with(j, "blur_sigma", where, [&](const json& v, const std::string& w) { s.blur_sigma = get_real_range(v, w); });
    with(j, "median_kernel", where, [&](const json& v, const std::string& w) { s.median_kernel = get_int_range(v, w); });
    with(j, "swirl_strength", where,
         [&](const json& v, const std::string& w) { s.swirl_strength = get_real_range(v, w); });
    with(j, "swirl_radius", where, [&](const json& v, const std::string& w) { s.swirl_radius = get_real_range(v, w); });
    with(j, "crop_size", where, [&](const json& v, const std::string& w) { s.crop_size = get_int(v, w); });
    with(j, "rescale_size", where, [&](const json& v, const std::string& w) { s.rescale_size = get_int_range(v, w); });
    with(j, "pad_size", where, [&](const json& v, const std::string& w) { s.pad_size = get_int(v, w); });
    with(j, "bart_kappa", where, [&](const json& v, const std::string& w) { s.bart_kappa = get_int(v, w); });
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
    return s;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
}

std::optional<std::filesystem::path> resolve(const std::string& p, const std::filesystem::path& base) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) {
        path = base / path;
    }
    return path;
}

ExperimentConfig parse_experiment(const json& j, const std::filesystem::path& base_dir) {
    const std::string root = "$";
    require_object(j, root,
                   {"experiment", "seed", "dataset", "model", "defenses", "attack", "aggregation", "finetune",
                    "invariance_draws", "workers", "output"});
    if (!j.contains("experiment")) {
        fail(root, "missing 'experiment'");
    }
    ExperimentKind kind;
    try {
        kind = experiment_kind_from_string(get_string(j["experiment"], "$.experiment"));
    } catch (const std::invalid_argument& e) {
        fail("$.experiment", e.what());
    }
    ExperimentConfig c = default_experiment_config(kind);
    with(j, "seed", root, [&](const json& v, const std::string& w) { c.seed = get_u64(v, w); });

    with(j, "dataset", root, [&](const json& d, const std::string& w) {
        require_object(d, w,
                       {"synthetic_seed", "train_per_class", "val_per_class", "test_per_class", "train_images",
                        "train_labels", "test_images", "test_labels", "test_size"});
        with(d, "synthetic_seed", w, [&](const json& v, const std::string& x) { c.dataset.synthetic_seed = get_u64(v, x); });
        with(d, "train_per_class", w,
             [&](const json& v, const std::string& x) { c.dataset.sizes.train_per_class = get_int(v, x); });
        with(d, "val_per_class", w,
             [&](const json& v, const std::string& x) { c.dataset.sizes.val_per_class = get_int(v, x); });
        with(d, "test_per_class", w,
             [&](const json& v, const std::string& x) { c.dataset.sizes.test_per_class = get_int(v, x); });
        with(d, "train_images", w,
             [&](const json& v, const std::string& x) { c.dataset.train_images = resolve(get_string(v, x), base_dir); });
        with(d, "train_labels", w,
             [&](const json& v, const std::string& x) { c.dataset.train_labels = resolve(get_string(v, x), base_dir); });
        with(d, "test_images", w,
             [&](const json& v, const std::string& x) { c.dataset.test_images = resolve(get_string(v, x), base_dir); });
        with(d, "test_labels", w,
             [&](const json& v, const std::string& x) { c.dataset.test_labels = resolve(get_string(v, x), base_dir); });
        with(d, "test_size", w, [&](const json& v, const std::string& x) { c.dataset.test_size = get_int(v, x); });
    });

    with(j, "model", root, [&](const json& m, const std::string& w) {
        require_object(m, w, {"checkpoint", "hidden_width", "epochs", "batch_size", "learning_rate", "weight_decay"});
        with(m, "checkpoint", w,
             [&](const json& v, const std::string& x) { c.model.checkpoint = resolve(get_string(v, x), base_dir); });
        with(m, "hidden_width", w, [&](const json& v, const std::string& x) { c.model.hidden_width = get_int(v, x); });
        with(m, "epochs", w, [&](const json& v, const std::string& x) { c.model.train.epochs = get_int(v, x); });
        with(m, "batch_size", w, [&](const json& v, const std::string& x) { c.model.train.batch_size = get_int(v, x); });
        with(m, "learning_rate", w,
             [&](const json& v, const std::string& x) { c.model.train.learning_rate = get_real(v, x); });
        with(m, "weight_decay", w,
             [&](const json& v, const std::string& x) { c.model.train.weight_decay = get_real(v, x); });
    });

    with(j, "defenses", root, [&](const json& d, const std::string& w) {
        if (!d.is_array()) {
            fail(w, "expected an array");
        }
        c.defenses.clear();
        for (std::size_t i = 0; i < d.size(); ++i) {
            c.defenses.push_back(parse_spec(d[i], w + "[" + std::to_string(i) + "]"));
        }
    });

    with(j, "attack", root, [&](const json& a, const std::string& w) {
        require_object(a, w, {"norm", "epsilon", "mode", "target_label", "cells", "alphas"});
        try {
            with(a, "norm", w, [&](const json& v, const std::string& x) { c.attack.norm = norm_from_string(get_string(v, x)); });
            with(a, "mode", w,
                 [&](const json& v, const std::string& x) { c.attack.mode = attack_mode_from_string(get_string(v, x)); });
        } catch (const std::invalid_argument& e) {
            fail(w, e.what());
        }
        with(a, "epsilon", w, [&](const json& v, const std::string& x) { c.attack.epsilon = get_real(v, x); });
        with(a, "target_label", w, [&](const json& v, const std::string& x) { c.attack.target_label = get_int(v, x); });
        with(a, "cells", w, [&](const json& cells, const std::string& x) {
            if (!cells.is_array()) {
                fail(x, "expected an array of {k, m}");
            }
            c.attack.cells.clear();
            for (std::size_t i = 0; i < cells.size(); ++i) {
                const std::string ci = x + "[" + std::to_string(i) + "]";
                require_object(cells[i], ci, {"k", "m"});
                if (!cells[i].contains("k") || !cells[i].contains("m")) {
                    fail(ci, "cells need both k and m");
                }
                c.attack.cells.push_back({get_int(cells[i]["k"], ci + ".k"), get_int(cells[i]["m"], ci + ".m")});
            }
        });
        with(a, "alphas", w, [&](const json& al, const std::string& x) {
            if (!al.is_array()) {
                fail(x, "expected an array of step sizes");
            }
            c.attack.alphas.clear();
            for (std::size_t i = 0; i < al.size(); ++i) {
                c.attack.alphas.push_back(get_real(al[i], x + "[" + std::to_string(i) + "]"));
            }
        });
    });

    with(j, "aggregation", root, [&](const json& a, const std::string& w) {
        require_object(a, w, {"rule", "n"});
        with(a, "rule", w, [&](const json& v, const std::string& x) {
            try {
                c.aggregation.kind = aggregation_kind_from_string(get_string(v, x));
            } catch (const std::invalid_argument& e) {
                fail(x, e.what());
            }
        });
        with(a, "n", w, [&](const json& v, const std::string& x) { c.aggregation.n = get_int(v, x); });
    });

    with(j, "finetune", root, [&](const json& f, const std::string& w) {
        require_object(f, w, {"snapshots", "batch_size", "learning_rate", "weight_decay"});
        with(f, "snapshots", w, [&](const json& s, const std::string& x) {
            if (!s.is_array()) {
                fail(x, "expected an array of epochs");
            }
            c.finetune.snapshots.clear();
            for (std::size_t i = 0; i < s.size(); ++i) {
                c.finetune.snapshots.push_back(get_int(s[i], x + "[" + std::to_string(i) + "]"));
            }
        });
        with(f, "batch_size", w, [&](const json& v, const std::string& x) { c.finetune.batch_size = get_int(v, x); });
        with(f, "learning_rate", w,
             [&](const json& v, const std::string& x) { c.finetune.learning_rate = get_real(v, x); });
        with(f, "weight_decay", w,
             [&](const json& v, const std::string& x) { c.finetune.weight_decay = get_real(v, x); });
    });

    with(j, "invariance_draws", root, [&](const json& v, const std::string& w) { c.invariance_draws = get_int(v, w); });
    with(j, "workers", root, [&](const json& v, const std::string& w) { c.workers = get_int(v, w); });
    with(j, "output", root, [&](const json& v, const std::string& w) { c.output = resolve(get_string(v, w), {}); });
    c.validate();
    return c;
}

} // namespace

PreprocessorSpec preprocessor_from_json(const json& j) { return parse_spec(j, "$"); }

namespace {

json all_fields(const PreprocessorSpec& s) {
    json j;
    j["kind"] = to_string(s.kind);
    j["noise_sigma"] = s.noise_sigma;
    j["rotation_degrees"] = range_json(s.rotation_degrees);
    j["injection_gaussian_std"] = range_json(s.injection_gaussian_std);
    j["injection_salt_pepper"] = range_json(s.injection_salt_pepper);
    j["injection_speckle_std"] = range_json(s.injection_speckle_std);
    j["quantize_bins"] = range_json(s.quantize_bins);
    j["fft_fraction"] = range_json(s.fft_fraction);
    j["blur_kernel"] = range_json(s.blur_kernel);
    j["blur_sigma"] = range_json(s.blur_sigma);
    j["median_kernel"] = range_json(s.median_kernel);
    j["swirl_strength"] = range_json(s.swirl_strength);
    j["swirl_radius"] = range_json(s.swirl_radius);
    j["crop_size"] = s.crop_size;
    j["rescale_size"] = range_json(s.rescale_size);
    j["pad_size"] = s.pad_size;
    j["bart_kappa"] = s.bart_kappa;
    return j;
}

} // namespace

// Fields left at their defaults are omitted.
json to_json(const PreprocessorSpec& s) {
    json j = all_fields(s);
    const json defaults = all_fields(PreprocessorSpec{});
    for (const auto& [key, value] : defaults.items()) {
        if (key != "kind" && j[key] == value) {
            j.erase(key);
        }
    }
    return j;
}

PreprocessorSpec load_preprocessor_spec(const std::filesystem::path& path) {
    return preprocessor_from_json(read_json_file(path));
}

ExperimentConfig experiment_config_from_json(const json& j) { return parse_experiment(j, {}); }

json to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = to_string(c.kind);
    j["seed"] = c.seed;
    json d;
    if (c.dataset.synthetic()) {
        d["synthetic_seed"] = c.dataset.synthetic_seed;
        d["train_per_class"] = c.dataset.sizes.train_per_class;
        d["val_per_class"] = c.dataset.sizes.val_per_class;
        d["test_per_class"] = c.dataset.sizes.test_per_class;
    } else {
        d["train_images"] = c.dataset.train_images->string();
        d["train_labels"] = c.dataset.train_labels->string();
        d["test_images"] = c.dataset.test_images->string();
        d["test_labels"] = c.dataset.test_labels->string();
    }
    d["test_size"] = c.dataset.test_size;
    j["dataset"] = d;
    json m;
    if (c.model.checkpoint) {
        m["checkpoint"] = c.model.checkpoint->string();
    }
    m["hidden_width"] = c.model.hidden_width;
    m["epochs"] = c.model.train.epochs;
    m["batch_size"] = c.model.train.batch_size;
    m["learning_rate"] = c.model.train.learning_rate;
    m["weight_decay"] = c.model.train.weight_decay;
    j["model"] = m;
    j["defenses"] = json::array();
    for (const auto& s : c.defenses) {
        j["defenses"].push_back(to_json(s));
    }
    json a;
    a["norm"] = to_string(c.attack.norm);
    a["epsilon"] = c.attack.epsilon;
    a["mode"] = to_string(c.attack.mode);
    a["target_label"] = c.attack.target_label;
    a["cells"] = json::array();
    for (const auto& cell : c.attack.cells) {
        a["cells"].push_back({{"k", cell.k}, {"m", cell.m}});
    }
    a["alphas"] = c.attack.alphas;
    j["attack"] = a;
    j["aggregation"] = {{"rule", to_string(c.aggregation.kind)}, {"n", c.aggregation.n}};
    j["finetune"] = {{"snapshots", c.finetune.snapshots},
                     {"batch_size", c.finetune.batch_size},
                     {"learning_rate", c.finetune.learning_rate},
                     {"weight_decay", c.finetune.weight_decay}};
    j["invariance_draws"] = c.invariance_draws;
    j["workers"] = c.workers;
    if (c.output) {
        j["output"] = c.output->string();
    }
    return j;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return parse_experiment(read_json_file(path), path.parent_path());
}

} // namespace stochdef
