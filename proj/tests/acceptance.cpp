// End-to-end acceptance suite. Each numbered criterion prints one PASS/FAIL
// line; the process exits nonzero if any fail.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wf/classifier.hpp"
#include "wf/defenses.hpp"
#include "wf/faa.hpp"
#include "wf/harness.hpp"
#include "wf/metrics.hpp"
#include "wf/pcap.hpp"
#include "wf/synth.hpp"
#include "../tests/pcap_builder.hpp"

using namespace wf;

namespace {

int g_failures = 0;

void report(int num, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", num, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

Trace random_trace(SeededRng& gen, int max_len = 60) {
    Trace t;
    int n = gen.randi(1, max_len);
    for (int i = 0; i < n; ++i) {
        int mag = gen.randi(1, 1514);
        t.sizes.push_back(gen.randi(0, 1) ? mag : -mag);
    }
    return t;
}

bool is_subsequence(const std::vector<int>& sub, const std::vector<int>& seq) {
    std::size_t j = 0;
    for (int s : seq)
        if (j < sub.size() && sub[j] == s) ++j;
    return j == sub.size();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// ----------------------------------------------------------------------

void criterion_1(const FilterList& list) {
    SeededRng gen(101);
    bool ok = true;
    std::string why = "all properties held over 1000 traces each";
    for (int iter = 0; iter < 1000 && ok; ++iter) {
        Trace t = random_trace(gen);
        std::uint64_t seed = SeededRng::derive(1, static_cast<std::uint64_t>(iter));

        SeededRng r1(seed);
        DefendedTrace drpd = rpd(t, RpdConfig{0.5, 1, 1514}, r1);
        std::vector<int> originals;
        for (const auto& p : drpd.packets)
            if (p.from == Provenance::Original) originals.push_back(p.signed_size);
        if (originals != t.sizes) {
            ok = false;
            why = "rpd original subsequence broken";
        }

        SeededRng r2(seed);
        DefendedTrace dins = lad_insert(t, LadConfig{0.5, LadMode::Insert, 100, list}, r2);
        originals.clear();
        for (const auto& p : dins.packets) {
            if (p.from == Provenance::Original) originals.push_back(p.signed_size);
            if (p.from == Provenance::Inserted && !list.contains(p.signed_size)) {
                ok = false;
                why = "lad-insert produced an off-list packet";
            }
        }
        if (originals != t.sizes) {
            ok = false;
            why = "lad-insert original subsequence broken";
        }

        SeededRng r3(seed);
        DefendedTrace dspl = lad_split(t, LadConfig{0.5, LadMode::Split, 100, list}, r3);
        long long before = 0, after = 0;
        for (int s : t.sizes) before += s;
        for (const auto& p : dspl.packets) {
            after += p.signed_size;
            if (p.signed_size == 0) {
                ok = false;
                why = "lad-split emitted a zero packet";
            }
        }
        if (before != after) {
            ok = false;
            why = "lad-split signed sum not conserved";
        }

        Trace f1 = faa_filter(t, list);
        Trace f2 = faa_filter(f1, list);
        if (f1.sizes != f2.sizes) {
            ok = false;
            why = "faa not idempotent";
        }
        if (!is_subsequence(f1.sizes, t.sizes)) {
            ok = false;
            why = "faa reordered or resized packets";
        }
    }
    report(1, "RPD/LAD/FAA property suites", ok, why);
}

void criterion_2(const Dataset& corpus) {
    const int x = 30;
    FilterList shared = build_filter(corpus, x);  // attacker and defender use the same list
    SeededRng gen(202);
    long long inserted = 0, removed = 0;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        for (int iter = 0; iter < 40; ++iter) {
            Trace t = random_trace(gen);
            SeededRng rng(SeededRng::derive(seed, static_cast<std::uint64_t>(iter)));
            DefendedTrace d = lad_insert(t, LadConfig{0.6, LadMode::Insert, 100, shared}, rng);
            for (const auto& p : d.packets)
                if (p.from == Provenance::Inserted) {
                    ++inserted;
                    if (!shared.contains(p.signed_size)) ++removed;
                }
        }
    }
    report(2, "LAD-insert immunity to matched FAA", removed == 0 && inserted > 0,
           std::to_string(removed) + " of " + std::to_string(inserted) + " inserted removed");
}

void criterion_3(const Dataset& corpus) {
    const int x = 30, s_min = 1, s_max = 1514;
    FilterList list = build_filter(corpus, x);
    int in_range = 0;
    for (int s : list.sizes)
        if (std::abs(s) >= s_min && std::abs(s) <= s_max) ++in_range;
    double p = static_cast<double>(in_range) / (2.0 * (s_max - s_min + 1));

    SeededRng rng(303);
    const int n = 10000;
    int survived = 0;
    for (int i = 0; i < n; ++i)
        if (list.contains(random_packet(s_min, s_max, rng))) ++survived;
    double sigma = std::sqrt(n * p * (1.0 - p));
    bool ok = std::abs(survived - n * p) <= 3.0 * sigma + 1e-9;
    report(3, "RPD survival matches closed form", ok,
           "survived " + std::to_string(survived) + ", expected " + fmt(n * p) + " +/- " +
               fmt(3.0 * sigma));
}

void criteria_4_5(const Dataset& train, const Dataset& test, const SweepOptions& opt,
                  double* rpd_acc_at_0) {
    SweepResult rpd_df = accuracy_sweep(train, test, DefenseConfig::Kind::Rpd, false, opt);
    SweepResult rpd_faa = accuracy_sweep(train, test, DefenseConfig::Kind::Rpd, true, opt);
    SweepResult lad_df = accuracy_sweep(train, test, DefenseConfig::Kind::LadInsert, false, opt);
    SweepResult lad_faa = accuracy_sweep(train, test, DefenseConfig::Kind::LadInsert, true, opt);

    auto at = [](const SweepResult& r, double pt) {
        for (const auto& [p, a] : r.points)
            if (std::abs(p - pt) < 1e-9) return a;
        return -1.0;
    };
    double acc0 = at(rpd_df, 0.0);
    double acc_def = at(rpd_df, 0.5);
    double acc_rec = at(rpd_faa, 0.5);
    if (rpd_acc_at_0) *rpd_acc_at_0 = acc0;
    bool ok4 = acc_def <= 0.6 * acc0 && acc_rec >= acc_def + 0.15;
    report(4, "RPD degrades the CNN and FAA recovers it", ok4,
           "acc(P_t=0)=" + fmt(acc0) + ", acc(RPD,0.5)=" + fmt(acc_def) +
               ", acc(RPD+FAA,0.5)=" + fmt(acc_rec));

    double clamp = 1.0 / static_cast<double>(test.traces.size());
    double de_rpd = defensive_efficiency(rpd_df, clamp);
    double de_rpd_faa = defensive_efficiency(rpd_faa, clamp);
    double de_lad = defensive_efficiency(lad_df, clamp);
    double de_lad_faa = defensive_efficiency(lad_faa, clamp);
    double drop_rpd = 1.0 - de_rpd_faa / de_rpd;
    double drop_lad = 1.0 - de_lad_faa / de_lad;
    bool ok5 = drop_rpd > drop_lad && drop_lad <= 0.25 && drop_rpd >= 0.40;
    report(5, "DE drop ordering: RPD breaks, LAD-insert resists", ok5,
           "drop(RPD)=" + fmt(drop_rpd) + " [DE " + fmt(de_rpd) + "->" + fmt(de_rpd_faa) +
               "], drop(LAD)=" + fmt(drop_lad) + " [DE " + fmt(de_lad) + "->" + fmt(de_lad_faa) +
               "]");
}

void criterion_6(const Dataset& world, const FilterList& defender_list) {
    const double p_t = 0.6;
    const int header = 40;
    long long orig_bytes = 0, orig_packets = 0;
    for (const Trace& t : world.traces)
        for (int s : t.sizes) {
            orig_bytes += std::abs(s);
            ++orig_packets;
        }

    auto rpd_overhead = [&](int s_max) {
        DefenseConfig cfg;
        cfg.kind = DefenseConfig::Kind::Rpd;
        cfg.rpd = RpdConfig{p_t, 1, s_max};
        return overhead(world, defend_dataset(world, cfg, 606), header);
    };
    double oh_small = rpd_overhead(500);
    double oh_medium = rpd_overhead(1000);
    double oh_large = rpd_overhead(1514);

    DefenseConfig split_cfg;
    split_cfg.kind = DefenseConfig::Kind::LadSplit;
    split_cfg.lad = LadConfig{p_t, LadMode::Split, 100, defender_list};
    double oh_split = overhead(world, defend_dataset(world, split_cfg, 607), header);

    bool ordered = oh_small < oh_medium && oh_medium < oh_large;
    bool split_cheap = oh_split < 0.1 * oh_large;

    // closed-form expectation for RPD: p_t * n * (s_min + s_max)/2 extra bytes
    bool closed_form = true;
    std::string cf_detail;
    for (auto [s_max, oh] : {std::pair{500, oh_small}, {1000, oh_medium}, {1514, oh_large}}) {
        double expected = p_t * static_cast<double>(orig_packets) * (1.0 + s_max) / 2.0 /
                          static_cast<double>(orig_bytes);
        if (std::abs(oh - expected) > 0.05 * expected) closed_form = false;
        cf_detail += fmt(oh) + "~" + fmt(expected) + " ";
    }
    report(6, "overhead ordering and closed form", ordered && split_cheap && closed_form,
           "rpd s/m/l=" + fmt(oh_small) + "/" + fmt(oh_medium) + "/" + fmt(oh_large) +
               ", split=" + fmt(oh_split) + ", closed-form " + cf_detail);
}

void criterion_7() {
    CnnArchitecture arch;
    arch.input_len = 20;
    arch.num_classes = 3;
    arch.channels = {4};
    CnnModel m(arch, 2024);

    SeededRng rng(14);
    std::vector<std::vector<double>> xs;
    std::vector<int> ys = {0, 2};
    for (int s = 0; s < 2; ++s) {
        std::vector<double> x(20);
        for (double& v : x) v = 2.0 * rng.randr() - 1.0;
        xs.push_back(x);
    }
    std::vector<double> analytic = m.batch_gradient(xs, ys);
    std::vector<double*> params = m.parameters();
    const double h = 1e-4;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        double orig = *params[i];
        *params[i] = orig + h;
        double up = m.batch_loss(xs, ys);
        *params[i] = orig - h;
        double down = m.batch_loss(xs, ys);
        *params[i] = orig;
        double numeric = (up - down) / (2.0 * h);
        max_rel = std::max(max_rel, std::abs(numeric - analytic[i]) /
                                        std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6}));
    }

    double worst_sum_err = 0.0;
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<double> x(20);
        for (double& v : x) v = 2.0 * rng.randr() - 1.0;
        std::vector<double> p = m.predict_proba(x);
        double sum = 0;
        for (double v : p) sum += v;
        worst_sum_err = std::max(worst_sum_err, std::abs(sum - 1.0));
    }

    // seed-fixed training reproducibility
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 2;
    cfg.seed = 7;
    std::vector<int> ys2;
    std::vector<std::vector<double>> xs2;
    for (int i = 0; i < 9; ++i) {
        std::vector<double> x(20);
        for (double& v : x) v = 2.0 * rng.randr() - 1.0;
        xs2.push_back(x);
        ys2.push_back(i % 3);
    }
    CnnModel a(arch, cfg.seed), b(arch, cfg.seed);
    a.train(xs2, ys2, cfg);
    b.train(xs2, ys2, cfg);
    bool identical = true;
    std::vector<double*> pa = a.parameters(), pb = b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i)
        if (*pa[i] != *pb[i]) identical = false;

    bool ok = max_rel < 1e-4 && worst_sum_err < 1e-6 && identical;
    report(7, "CNN gradient, softmax, reproducibility", ok,
           "grad max rel err " + fmt(max_rel) + ", softmax err " + fmt(worst_sum_err) +
               (identical ? ", bit-identical retrain" : ", retrain diverged"));
}

void criterion_8() {
    bool de_ok = std::abs(defensive_efficiency({0.5, 0.25, 0.25}) - 3.0) < 1e-12 &&
                 std::abs(defensive_efficiency({1.0, 1.0}) - 1.0) < 1e-12;

    SeededRng rng(808);
    std::vector<double> scores;
    std::vector<bool> mon;
    for (int i = 0; i < 1000; ++i) {
        scores.push_back(rng.randr());
        mon.push_back(rng.randi(0, 1) == 1);
    }
    RocCurve c = roc(scores, mon, threshold_grid(0.0, 1.0, 201));
    bool monotone = c.points.front().fpr == 0.0 && c.points.front().tpr == 0.0 &&
                    c.points.back().fpr == 1.0 && c.points.back().tpr == 1.0;
    for (std::size_t i = 1; i < c.points.size(); ++i)
        if (c.points[i].fpr < c.points[i - 1].fpr || c.points[i].tpr < c.points[i - 1].tpr)
            monotone = false;
    bool auc_ok = std::abs(c.auc - 0.5) <= 0.05;
    report(8, "metrics: DE formula, ROC shape, null AUC", de_ok && monotone && auc_ok,
           "DE exact, null AUC " + fmt(c.auc));
}

void criterion_9() {
    constexpr std::uint32_t client = 0xc0a80102, server = 0x08080808;
    bool ok = true;
    std::string why = "native and swapped fixtures parse byte-exact; csv round trip identical";
    for (bool be : {false, true}) {
        auto file = testpcap::global_header(be);
        testpcap::add_record(file, testpcap::frame(client, server, 6, 60), be);
        testpcap::add_record(file, testpcap::frame(server, client, 6, 1514), be);
        testpcap::add_record(file, testpcap::frame(client, server, 17, 80), be);  // UDP skipped
        Trace t = parse_pcap(file, ClientIdentity{client});
        if (t.sizes != std::vector<int>{60, -1514}) {
            ok = false;
            why = "pcap fixture mismatch";
        }
    }

    Dataset ds;
    ds.class_count = 2;
    ds.open_world = true;
    ds.traces.push_back(Trace{{1514, -1514, 52}, Label::monitored(1)});
    ds.traces.push_back(Trace{{100}, Label::unmonitored()});
    const char* p1 = "acc_rt1.csv";
    const char* p2 = "acc_rt2.csv";
    write_csv_dataset(ds, p1);
    write_csv_dataset(read_csv_dataset(p1), p2);
    std::ifstream a(p1), b(p2);
    std::string sa((std::istreambuf_iterator<char>(a)), {});
    std::string sb((std::istreambuf_iterator<char>(b)), {});
    if (sa != sb || sa.empty()) {
        ok = false;
        why = "csv round trip differed";
    }
    std::remove(p1);
    std::remove(p2);
    report(9, "pcap fixtures and csv round trip", ok, why);
}

void criterion_10(const WorldConfig& wcfg, const SweepOptions& opt) {
    Dataset open = gen_open_world(wcfg, 200);
    Dataset train, test;
    split_train_test(open, 0.8, opt.train.seed, train, test);

    FilterList attacker_list = build_filter(train, opt.attacker_x);
    FilterList defender_list = build_filter(train, opt.defender_x);
    CnnModel clean_model = train_cnn_on(train, opt);
    CnnModel filtered_model = train_cnn_on(filter_dataset(train, attacker_list), opt);

    const double p_t = 0.5;
    auto auc_of = [&](const Classifier& m, const Dataset& prepared) {
        std::vector<double> scores;
        std::vector<bool> monitored;
        open_world_scores(m, prepared, opt.feature_len, scores, monitored);
        return roc(scores, monitored, threshold_grid(0.0, 1.0, 101)).auc;
    };

    double auc_none = auc_of(clean_model, test);

    DefenseConfig lad = make_defense(DefenseConfig::Kind::LadInsert, p_t, opt, defender_list);
    Dataset lad_test = filter_dataset(defend_and_strip(test, lad, opt.defense_seed), attacker_list);
    double auc_lad_faa = auc_of(filtered_model, lad_test);

    DefenseConfig rpd_cfg = make_defense(DefenseConfig::Kind::Rpd, p_t, opt, defender_list);
    double auc_rpd = auc_of(clean_model, defend_and_strip(test, rpd_cfg, opt.defense_seed));

    bool ok = auc_none - auc_lad_faa >= 0.03 && auc_lad_faa - auc_rpd >= 0.03;
    report(10, "open-world AUC ordering", ok,
           "none=" + fmt(auc_none) + ", lad+faa=" + fmt(auc_lad_faa) + ", rpd=" + fmt(auc_rpd));
}

}  // namespace

int main() {
    WorldConfig wcfg;  // defaults: C=20, R=40, n in [200,400], fixed seed
    Dataset world = gen_closed_world(wcfg);
    Dataset train, test;
    split_train_test(world, 0.8, 11, train, test);

    SweepOptions opt;
    opt.train.seed = 11;
    opt.rpd_range = RpdConfig{0.0, 1, 1514};

    FilterList defender_list = build_filter(train, opt.defender_x);

    criterion_1(defender_list);
    criterion_2(train);
    criterion_3(train);
    criteria_4_5(train, test, opt, nullptr);
    criterion_6(world, defender_list);
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10(wcfg, opt);

    if (g_failures) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
