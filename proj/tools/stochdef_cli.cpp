#include "stochdef/aggregation.hpp"
#include "stochdef/analytic.hpp"
#include "stochdef/attacks.hpp"
#include "stochdef/checkpoint.hpp"
#include "stochdef/classifier.hpp"
#include "stochdef/config.hpp"
#include "stochdef/dataset.hpp"
#include "stochdef/experiments.hpp"
#include "stochdef/metrics.hpp"
#include "stochdef/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace stochdef;

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    return out;
}

Dataset load_split(const fs::path& dir, const std::string& split) {
    return load_dataset(dir / (split + "_images.stdb"), dir / (split + "_labels.stdb"));
}

PreprocessorSpec defense_or_identity(const std::string& path) {
    return path.empty() ? PreprocessorSpec::identity() : load_preprocessor_spec(path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic pre-processing defense evaluation"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "write the synthetic glyph dataset as tensor files");
    std::uint64_t gen_seed = 1;
    std::string gen_out;
    SplitSizes sizes;
    gen->add_option("--seed", gen_seed)->capture_default_str();
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--train-per-class", sizes.train_per_class)->capture_default_str();
    gen->add_option("--val-per-class", sizes.val_per_class)->capture_default_str();
    gen->add_option("--test-per-class", sizes.test_per_class)->capture_default_str();

    // train
    auto* tr = app.add_subcommand("train", "train or fine-tune the classifier");
    std::uint64_t tr_seed = 0;
    std::string tr_out, tr_data, tr_init, tr_augment;
    TrainConfig tc;
    int hidden = 128;
    tr->add_option("--seed", tr_seed)->capture_default_str();
    tr->add_option("--out", tr_out, "checkpoint directory")->required();
    tr->add_option("--data", tr_data, "directory written by gen-data")->required();
    tr->add_option("--init", tr_init, "start from this checkpoint instead of a fresh initialization");
    tr->add_option("--augment", tr_augment, "pre-processor JSON applied to every training example");
    tr->add_option("--epochs", tc.epochs)->capture_default_str();
    tr->add_option("--first-epoch", tc.first_epoch)->capture_default_str();
    tr->add_option("--batch-size", tc.batch_size)->capture_default_str();
    tr->add_option("--lr", tc.learning_rate)->capture_default_str();
    tr->add_option("--weight-decay", tc.weight_decay)->capture_default_str();
    tr->add_option("--hidden", hidden)->capture_default_str();

    // attack
    auto* at = app.add_subcommand("attack", "attack a defended model on the test split");
    std::string at_defense, at_model, at_data, at_out, at_norm = "linf", at_mode = "untargeted", at_rule = "vote";
    AttackConfig ac;
    int at_target = 9, at_limit = 200, at_vote = 101, at_workers = 0, at_draws = 10;
    at->add_option("--seed", ac.seed)->capture_default_str();
    at->add_option("--out", at_out, "CSV report")->required();
    at->add_option("--defense", at_defense, "pre-processor JSON (identity when omitted)");
    at->add_option("--model", at_model, "checkpoint directory")->required();
    at->add_option("--data", at_data, "directory written by gen-data")->required();
    at->add_option("--norm", at_norm)->check(CLI::IsMember({"linf", "l2"}))->capture_default_str();
    at->add_option("--eps", ac.epsilon)->capture_default_str();
    at->add_option("--alpha", ac.alpha)->capture_default_str();
    at->add_option("--steps", ac.pgd_steps)->capture_default_str();
    at->add_option("--eot", ac.eot_samples)->capture_default_str();
    at->add_option("--mode", at_mode)->check(CLI::IsMember({"untargeted", "targeted"}))->capture_default_str();
    at->add_option("--target", at_target)->capture_default_str();
    at->add_option("--rule", at_rule)->check(CLI::IsMember({"vote", "match_all", "avg_logits"}))->capture_default_str();
    at->add_option("--votes", at_vote)->capture_default_str();
    at->add_option("--limit", at_limit, "number of leading test examples")->capture_default_str();
    at->add_option("--workers", at_workers, "0 = hardware concurrency")->capture_default_str();
    at->add_option("--invariance-draws", at_draws, "defended draws per image for the invariance column")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // measure-invariance
    auto* mi = app.add_subcommand("measure-invariance", "empirical invariance of a model to a pre-processor");
    std::uint64_t mi_seed = 0;
    std::string mi_defense, mi_model, mi_data, mi_out;
    int mi_draws = 10, mi_limit = 200;
    mi->add_option("--seed", mi_seed)->capture_default_str();
    mi->add_option("--out", mi_out, "CSV output")->required();
    mi->add_option("--defense", mi_defense, "pre-processor JSON")->required();
    mi->add_option("--model", mi_model, "checkpoint directory")->required();
    mi->add_option("--data", mi_data, "directory written by gen-data")->required();
    mi->add_option("--draws", mi_draws)->capture_default_str();
    mi->add_option("--limit", mi_limit)->capture_default_str();

    // exp
    auto* ex = app.add_subcommand("exp", "run an experiment grid");
    std::string ex_which, ex_config, ex_out;
    std::optional<std::uint64_t> ex_seed;
    std::optional<int> ex_workers;
    bool ex_quiet = false;
    bool ex_print = false;
    ex->add_option("which", ex_which)->required()->check(CLI::IsMember({"e1", "e2", "e3"}));
    ex->add_option("--config", ex_config, "experiment JSON (built-in defaults when omitted)");
    ex->add_option("--seed", ex_seed, "overrides the config seed");
    ex->add_option("--out", ex_out, "CSV output (overrides the config)");
    ex->add_option("--workers", ex_workers, "0 = hardware concurrency");
    ex->add_flag("--quiet", ex_quiet, "no progress on stderr");
    ex->add_flag("--print-config", ex_print, "print the resolved config as JSON and exit");

    // analytic
    auto* an = app.add_subcommand("analytic", "one-dimensional Gaussian model");
    an->require_subcommand(1);
    auto* sw = an->add_subcommand("sweep", "tabulate Acc, Rob and invariance over a parameter grid");
    std::vector<double> sw_k{0.0, 0.5, 1.0, 1.5, 2.0}, sw_sigma{1.0}, sw_eps{1.0};
    std::vector<int> sw_n{1};
    analytic::MonteCarloConfig sw_mc{200000, 0, 1};
    std::string sw_out;
    sw->add_option("--k", sw_k)->delimiter(',')->capture_default_str();
    sw->add_option("--sigma", sw_sigma)->delimiter(',')->capture_default_str();
    sw->add_option("--epsilon", sw_eps)->delimiter(',')->capture_default_str();
    sw->add_option("--n", sw_n, "odd vote sizes")->delimiter(',')->capture_default_str();
    sw->add_option("--samples", sw_mc.samples)->capture_default_str();
    sw->add_option("--workers", sw_mc.workers)->capture_default_str();
    sw->add_option("--seed", sw_mc.seed)->capture_default_str();
    sw->add_option("--out", sw_out, "CSV output")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            const SyntheticSplits s = generate_synthetic_dataset(gen_seed, sizes);
            const fs::path dir(gen_out);
            fs::create_directories(dir);
            save_dataset(dir / "train_images.stdb", dir / "train_labels.stdb", s.train);
            save_dataset(dir / "val_images.stdb", dir / "val_labels.stdb", s.val);
            save_dataset(dir / "test_images.stdb", dir / "test_labels.stdb", s.test);
            std::cout << "wrote " << s.train.size() << "/" << s.val.size() << "/" << s.test.size()
                      << " train/val/test examples to " << dir << "\n";
        } else if (*tr) {
            const Dataset train_set = load_split(tr_data, "train");
            ClassifierParams params =
                tr_init.empty() ? ClassifierParams::initialize(train_set.images.at(0).shape(), hidden,
                                                               kSyntheticClasses, tr_seed)
                                : load_checkpoint(tr_init);
            tc.seed = tr_seed;
            if (!tr_augment.empty()) {
                tc.augment = load_preprocessor_spec(tr_augment);
            }
            TrainLog log;
            params = train(std::move(params), train_set, tc, &log);
            save_checkpoint(tr_out, params);
            for (std::size_t e = 0; e < log.epoch_loss.size(); ++e) {
                std::cout << "epoch " << tc.first_epoch + static_cast<int>(e) << " loss " << log.epoch_loss[e] << "\n";
            }
            if (fs::exists(fs::path(tr_data) / "test_images.stdb")) {
                std::cout << "clean test accuracy " << clean_accuracy(params, load_split(tr_data, "test")) << "\n";
            }
        } else if (*at) {
            const PreprocessorSpec defense = defense_or_identity(at_defense);
            const ClassifierParams params = load_checkpoint(at_model);
            const Dataset test = load_split(at_data, "test").head(static_cast<std::size_t>(at_limit));
            ac.norm = norm_from_string(at_norm);
            ac.mode = attack_mode_from_string(at_mode);
            if (ac.mode == AttackMode::targeted) {
                ac.target_label = at_target;
            }
            const AggregationRule rule{aggregation_kind_from_string(at_rule), at_vote};
            rule.validate();
            const std::vector<int> pre =
                aggregated_labels(rule, defense, params, test, SeededRng(ac.seed, 1), at_workers);
            const RateCount benign = accuracy_of(pre, test.labels);
            const AttackOutcome outcome =
                evaluate_attack(defense, params, test, pre, ac, rule, SeededRng(ac.seed, 2), at_workers);
            EvalReport row;
            row.experiment = "attack";
            row.defense_kind = to_string(defense.kind);
            row.defense_param = defense.param_label();
            row.k = ac.pgd_steps;
            row.m = ac.eot_samples;
            row.alpha = ac.alpha;
            row.strength = ac.strength();
            row.mode = at_mode;
            row.benign_hits = benign.hits;
            row.benign_n = benign.total;
            row.success_hits = outcome.success.hits;
            row.success_n = outcome.success.total;
            const RateCount inv =
                measure_invariance_counts(defense, params, test, at_draws, SeededRng(ac.seed, 3), at_workers);
            row.invariance_hits = inv.hits;
            row.invariance_n = inv.total;
            row.seed = ac.seed;
            write_csv(fs::path(at_out), {row});
            std::cout << "benign " << row.benign_accuracy() << " (" << benign.total << "), success "
                      << row.success_rate() << " (" << outcome.success.total << ")\n";
        } else if (*mi) {
            const PreprocessorSpec defense = load_preprocessor_spec(mi_defense);
            const ClassifierParams params = load_checkpoint(mi_model);
            const Dataset test = load_split(mi_data, "test").head(static_cast<std::size_t>(mi_limit));
            const RateCount inv = measure_invariance_counts(defense, params, test, mi_draws, SeededRng(mi_seed, 0));
            auto out = open_out(mi_out);
            out << "defense_kind,defense_param,invariance,agree,pairs,draws,seed\n"
                << to_string(defense.kind) << ',' << defense.param_label() << ',' << format_real(inv.rate()) << ','
                << inv.hits << ',' << inv.total << ',' << mi_draws << ',' << mi_seed << '\n';
            std::cout << "invariance " << inv.rate() << " over " << inv.total << " pairs\n";
        } else if (*ex) {
            ExperimentConfig cfg = ex_config.empty() ? default_experiment_config(experiment_kind_from_string(ex_which))
                                                     : load_experiment_config(ex_config);
            if (to_string(cfg.kind) != ex_which) {
                throw std::invalid_argument("config is for " + to_string(cfg.kind) + ", not " + ex_which);
            }
            if (ex_seed) {
                cfg.seed = *ex_seed;
            }
            if (ex_workers) {
                cfg.workers = *ex_workers;
            }
            if (!ex_out.empty()) {
                cfg.output = ex_out;
            }
            if (ex_print) {
                std::cout << to_json(cfg).dump(2) << "\n";
                return 0;
            }
            if (!cfg.output) {
                throw std::invalid_argument("no output path: pass --out or set \"output\" in the config");
            }
            ProgressFn progress;
            if (!ex_quiet) {
                progress = [](const std::string& m) { std::cerr << m << std::endl; };
            }
            const auto rows = run_experiment(cfg, progress);
            std::cout << "wrote " << rows.size() << " rows to " << *cfg.output << "\n";
        } else if (*sw) {
            const auto rows = analytic::sweep(sw_k, sw_sigma, sw_eps, sw_n, sw_mc);
            auto out = open_out(sw_out);
            out << "k,sigma,epsilon,n,acc,rob,invariance,rob_mc,rob_mc_stderr\n";
            for (const auto& r : rows) {
                out << format_real(r.k) << ',' << format_real(r.sigma) << ',' << format_real(r.epsilon) << ','
                    << r.n << ',' << format_real(r.acc) << ',' << format_real(r.rob) << ','
                    << format_real(r.invariance) << ',' << format_real(r.rob_mc) << ','
                    << format_real(r.rob_mc_stderr) << '\n';
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
