#include "wf/harness.hpp"

#include <fstream>

namespace wf {

DefenseConfig make_defense(DefenseConfig::Kind kind, double p_t, const SweepOptions& opt,
                           const FilterList& defender_list) {
    DefenseConfig cfg;
    cfg.kind = kind;
    cfg.rpd = opt.rpd_range;
    cfg.rpd.p_t = p_t;
    cfg.lad.p_t = p_t;
    cfg.lad.s_min = opt.split_floor;
    cfg.lad.list = defender_list;
    cfg.lad.mode = kind == DefenseConfig::Kind::LadSplit ? LadMode::Split : LadMode::Insert;
    return cfg;
}

Dataset defend_and_strip(const Dataset& ds, const DefenseConfig& cfg, std::uint64_t seed) {
    Dataset out;
    out.class_count = ds.class_count;
    out.open_world = ds.open_world;
    std::vector<DefendedTrace> defended = defend_dataset(ds, cfg, seed);
    out.traces.reserve(defended.size());
    for (const DefendedTrace& d : defended) out.traces.push_back(strip_provenance(d));
    return out;
}

double accuracy_on(const Classifier& m, const Dataset& test, int f) {
    return evaluate_closed(m, test, f).accuracy;
}

CnnModel train_cnn_on(const Dataset& train, const SweepOptions& opt) {
    CnnArchitecture arch;
    arch.input_len = opt.feature_len;
    arch.num_classes = train.class_count;
    arch.channels = opt.channels;
    CnnModel model(arch, opt.train.seed);
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    for (const Trace& t : train.traces) {
        xs.push_back(vectorize(t, opt.feature_len));
        ys.push_back(t.label.site_index);
    }
    model.train(xs, ys, opt.train);
    return model;
}

SweepResult accuracy_sweep(const Dataset& train, const Dataset& test, DefenseConfig::Kind kind,
                           bool under_faa, const SweepOptions& opt) {
    FilterList attacker_list = build_filter(train, opt.attacker_x);
    FilterList defender_list = build_filter(train, opt.defender_x);

    Dataset model_train = under_faa ? filter_dataset(train, attacker_list) : train;
    CnnModel model = train_cnn_on(model_train, opt);

    SweepResult sweep;
    sweep.tag = std::string(kind == DefenseConfig::Kind::Rpd         ? "rpd"
                            : kind == DefenseConfig::Kind::LadInsert ? "lad-insert"
                            : kind == DefenseConfig::Kind::LadSplit  ? "lad-split"
                                                                     : "none") +
                (under_faa ? "+faa" : "");
    for (double p_t : opt.p_grid) {
        DefenseConfig cfg = make_defense(kind, p_t, opt, defender_list);
        Dataset defended = defend_and_strip(test, cfg, opt.defense_seed);
        if (under_faa) defended = filter_dataset(defended, attacker_list);
        sweep.points.emplace_back(p_t, accuracy_on(model, defended, opt.feature_len));
    }
    return sweep;
}

void open_world_scores(const Classifier& m, const Dataset& test, int f,
                       std::vector<double>& scores, std::vector<bool>& monitored) {
    scores.clear();
    monitored.clear();
    for (const Trace& t : test.traces) {
        scores.push_back(monitored_score(m.predict_proba(vectorize(t, f))));
        monitored.push_back(t.label.is_monitored());
    }
}

void write_sweep_csv(const SweepResult& sweep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# wf-sweep v1\np_t,accuracy,tag\n";
    for (const auto& [p, a] : sweep.points) out << p << ',' << a << ',' << sweep.tag << '\n';
}

void write_roc_csv(const RocCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# wf-roc v1\nthreshold,fpr,tpr\n";
    for (const RocPoint& p : curve.points)
        out << p.threshold << ',' << p.fpr << ',' << p.tpr << '\n';
    out << "# auc," << curve.auc << '\n';
}

}  // namespace wf
