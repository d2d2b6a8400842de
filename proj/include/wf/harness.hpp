#pragma once

#include "wf/classifier.hpp"
#include "wf/defenses.hpp"
#include "wf/faa.hpp"
#include "wf/metrics.hpp"

namespace wf {

// Shared experiment plumbing: one (defense, attack) sweep cell is a model
// trained once plus per-P_t evaluation on the defended (and optionally
// FAA-filtered) test set.

struct SweepOptions {
    int feature_len = 200;
    std::vector<int> channels = {8, 16};  // desk-scale net
    TrainConfig train;
    RpdConfig rpd_range;       // size range for RPD cells
    int split_floor = 100;     // S_m for LAD split cells
    int attacker_x = 30;
    int defender_x = 30;
    std::vector<double> p_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::uint64_t defense_seed = 99;
};

DefenseConfig make_defense(DefenseConfig::Kind kind, double p_t, const SweepOptions& opt,
                           const FilterList& defender_list);

// Defends every trace of ds at p_t (derived per-trace seeds) and strips
// provenance back to a plain dataset.
Dataset defend_and_strip(const Dataset& ds, const DefenseConfig& cfg, std::uint64_t seed);

double accuracy_on(const Classifier& m, const Dataset& test, int f);

// Trains the cell model on the (optionally FAA-filtered) training set, then
// walks the P_t grid. Lists for both sides are built from the clean
// training corpus.
SweepResult accuracy_sweep(const Dataset& train, const Dataset& test, DefenseConfig::Kind kind,
                           bool under_faa, const SweepOptions& opt);

// Open-world membership scores for a prepared test set.
void open_world_scores(const Classifier& m, const Dataset& test, int f,
                       std::vector<double>& scores, std::vector<bool>& monitored);

CnnModel train_cnn_on(const Dataset& train, const SweepOptions& opt);

void write_sweep_csv(const SweepResult& sweep, const std::string& path);
void write_roc_csv(const RocCurve& curve, const std::string& path);

}  // namespace wf
