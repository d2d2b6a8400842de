// Experiment runner: dataset synthesis, pcap ingestion, size statistics,
// defense application, attack filtering, training, evaluation, sweeps and
// ROC emission. All outputs are CSV with a versioned header line.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "wf/classifier.hpp"
#include "wf/defenses.hpp"
#include "wf/faa.hpp"
#include "wf/harness.hpp"
#include "wf/metrics.hpp"
#include "wf/pcap.hpp"
#include "wf/synth.hpp"

namespace fs = std::filesystem;
using namespace wf;

namespace {

// WF_OUTDIR prefixes relative output paths.
std::string out_path(const std::string& path) {
    const char* dir = std::getenv("WF_OUTDIR");
    if (!dir || *dir == '\0' || fs::path(path).is_absolute()) return path;
    fs::create_directories(dir);
    return (fs::path(dir) / path).string();
}

int thread_count() {
    const char* t = std::getenv("WF_THREADS");
    if (!t) return 2;
    int n = std::atoi(t);
    return n >= 1 ? n : 1;
}

DefenseConfig::Kind parse_kind(const std::string& name) {
    if (name == "none") return DefenseConfig::Kind::None;
    if (name == "rpd") return DefenseConfig::Kind::Rpd;
    if (name == "lad-insert") return DefenseConfig::Kind::LadInsert;
    if (name == "lad-split") return DefenseConfig::Kind::LadSplit;
    throw CLI::ValidationError("unknown defense '" + name + "'");
}

// Size-range presets: small (-500..500), medium (-1000..1000), large (-1514..1514).
void apply_range_preset(const std::string& preset, int& s_min, int& s_max) {
    if (preset.empty()) return;
    s_min = 1;
    if (preset == "small")
        s_max = 500;
    else if (preset == "medium")
        s_max = 1000;
    else if (preset == "large")
        s_max = 1514;
    else
        throw CLI::ValidationError("unknown range preset '" + preset + "'");
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> grid;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) grid.push_back(std::stod(tok));
    if (grid.empty()) throw CLI::ValidationError("empty P_t grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1]) throw CLI::ValidationError("P_t grid must be strictly increasing");
    return grid;
}

std::vector<int> parse_channels(const std::string& csv) {
    std::vector<int> ch;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) ch.push_back(std::stoi(tok));
    return ch;
}

void write_provenance(const std::vector<DefendedTrace>& defended, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# wf-provenance v1\n";
    for (const DefendedTrace& d : defended) {
        out << d.split_count << ':';
        for (const TaggedPacket& p : d.packets)
            out << (p.from == Provenance::Original ? 'O'
                    : p.from == Provenance::Inserted ? 'I' : 'S');
        out << '\n';
    }
}

std::vector<DefendedTrace> read_provenance(const Dataset& defended_ds, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(in, line);
    if (line != "# wf-provenance v1") throw std::runtime_error("bad provenance header");
    std::vector<DefendedTrace> out;
    std::size_t idx = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (idx >= defended_ds.traces.size())
            throw MisalignedDatasets("more provenance rows than traces");
        std::size_t colon = line.find(':');
        DefendedTrace d;
        d.split_count = std::stoi(line.substr(0, colon));
        const Trace& t = defended_ds.traces[idx];
        std::string tags = line.substr(colon + 1);
        if (tags.size() != t.sizes.size())
            throw MisalignedDatasets("provenance row length mismatch");
        d.label = t.label;
        for (std::size_t i = 0; i < tags.size(); ++i)
            d.packets.push_back({t.sizes[i], tags[i] == 'O'   ? Provenance::Original
                                             : tags[i] == 'I' ? Provenance::Inserted
                                                              : Provenance::SplitChild});
        out.push_back(std::move(d));
        ++idx;
    }
    if (idx != defended_ds.traces.size())
        throw MisalignedDatasets("fewer provenance rows than traces");
    return out;
}

struct CommonModelOpts {
    int feature_len = 200;
    std::string channels = "8,16";
    int epochs = 30;
    int batch = 32;
    double lr = 1e-3;
    double split_ratio = 0.8;
    std::uint64_t seed = 1;
};

void add_model_opts(CLI::App* cmd, CommonModelOpts& o) {
    cmd->add_option("--features", o.feature_len, "feature vector length F");
    cmd->add_option("--channels", o.channels, "conv unit channels, comma separated");
    cmd->add_option("--epochs", o.epochs);
    cmd->add_option("--batch", o.batch);
    cmd->add_option("--lr", o.lr, "Adam learning rate");
    cmd->add_option("--split-ratio", o.split_ratio, "train fraction");
    cmd->add_option("--seed", o.seed)->required();
}

SweepOptions to_sweep_options(const CommonModelOpts& o, int attacker_x, int defender_x,
                              const RpdConfig& rpd_range, int split_floor,
                              const std::vector<double>& grid) {
    SweepOptions opt;
    opt.feature_len = o.feature_len;
    opt.channels = parse_channels(o.channels);
    opt.train.epochs = o.epochs;
    opt.train.batch_size = o.batch;
    opt.train.learning_rate = o.lr;
    opt.train.seed = o.seed;
    opt.train.split_ratio = o.split_ratio;
    opt.rpd_range = rpd_range;
    opt.split_floor = split_floor;
    opt.attacker_x = attacker_x;
    opt.defender_x = defender_x;
    opt.p_grid = grid;
    opt.defense_seed = SeededRng::derive(o.seed, 0xdef);
    return opt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"website-fingerprinting attack/defense workbench"};
    app.require_subcommand(1);

    // ---- synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->set_config("--config");
    WorldConfig wcfg;
    int unmonitored = 0;
    std::string synth_out;
    synth->add_option("--sites", wcfg.num_sites);
    synth->add_option("--per-site", wcfg.traces_per_site);
    synth->add_option("--n-min", wcfg.n_min);
    synth->add_option("--n-max", wcfg.n_max);
    synth->add_option("--sig-len", wcfg.signature_len);
    synth->add_option("--drop-prob", wcfg.drop_prob);
    synth->add_option("--resize-prob", wcfg.resize_prob);
    synth->add_option("--seed", wcfg.seed)->required();
    synth->add_option("--unmonitored", unmonitored, "open-world singleton traces");
    synth->add_option("-o,--output", synth_out)->required();

    // ---- ingest
    auto* ingest = app.add_subcommand("ingest", "parse a directory of <label>_<n>.pcap files");
    std::string pcap_dir, client_ip, ingest_out;
    ingest->add_option("--dir", pcap_dir)->required();
    ingest->add_option("--client", client_ip, "client IPv4 address")->required();
    ingest->add_option("-o,--output", ingest_out)->required();

    // ---- stats
    auto* stats = app.add_subcommand("stats", "histogram and top-X filter list");
    std::string stats_in, hist_out = "histogram.csv", filter_out = "filter.csv";
    int stats_x = 30;
    stats->add_option("--input", stats_in)->required();
    stats->add_option("-X,--top", stats_x);
    stats->add_option("--histogram", hist_out);
    stats->add_option("--filter", filter_out);

    // ---- defend
    auto* defend = app.add_subcommand("defend", "apply a defense to a dataset");
    defend->set_config("--config");
    std::string defend_in, defend_corpus, defend_out, sidecar_out, defense_name = "rpd",
                range_preset;
    double defend_pt = 0.5;
    int defend_smin = 1, defend_smax = 1514, defend_floor = 100, defend_x = 30;
    std::uint64_t defend_seed = 0;
    defend->add_option("--input", defend_in)->required();
    defend->add_option("--corpus", defend_corpus, "statistics corpus for LAD (default: input)");
    defend->add_option("--defense", defense_name, "rpd | lad-insert | lad-split");
    defend->add_option("--p-t", defend_pt);
    defend->add_option("--s-min", defend_smin);
    defend->add_option("--s-max", defend_smax);
    defend->add_option("--range", range_preset, "small | medium | large preset");
    defend->add_option("--split-floor", defend_floor, "split remainder floor S_m");
    defend->add_option("-X,--top", defend_x);
    defend->add_option("--seed", defend_seed)->required();
    defend->add_option("-o,--output", defend_out)->required();
    defend->add_option("--sidecar", sidecar_out, "provenance sidecar path");

    // ---- attack-filter
    auto* attack = app.add_subcommand("attack-filter", "FAA-filter a dataset");
    std::string attack_in, attack_corpus, attack_out;
    int attack_x = 30;
    attack->add_option("--input", attack_in)->required();
    attack->add_option("--corpus", attack_corpus, "attacker statistics corpus")->required();
    attack->add_option("-X,--top", attack_x);
    attack->add_option("-o,--output", attack_out)->required();

    // ---- train
    auto* train = app.add_subcommand("train", "train the CNN on a dataset");
    std::string train_in, model_out, loss_out;
    CommonModelOpts train_opts;
    train->set_config("--config");
    train->add_option("--input", train_in)->required();
    add_model_opts(train, train_opts);
    train->add_option("-o,--model", model_out)->required();
    train->add_option("--loss-csv", loss_out);

    // ---- eval
    auto* eval = app.add_subcommand("eval", "accuracy (and overhead) of a model on a dataset");
    std::string eval_model, eval_in, eval_orig, eval_sidecar;
    int header_bytes = 40;
    eval->add_option("--model", eval_model)->required();
    eval->add_option("--input", eval_in, "test dataset (defended csv if measuring overhead)")
        ->required();
    eval->add_option("--original", eval_orig, "original dataset for overhead");
    eval->add_option("--sidecar", eval_sidecar, "provenance sidecar for overhead");
    eval->add_option("--header-bytes", header_bytes);

    // ---- sweep
    auto* sweep = app.add_subcommand("sweep", "accuracy-vs-P_t sweep with DE summary");
    sweep->set_config("--config");
    std::string sweep_in, sweep_defense = "rpd", sweep_grid = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0",
                sweep_out, sweep_range;
    bool sweep_faa = false, sweep_all = false;
    int sweep_ax = 30, sweep_dx = 30, sweep_floor = 100, sweep_smin = 1, sweep_smax = 1514;
    CommonModelOpts sweep_opts;
    sweep->add_option("--input", sweep_in)->required();
    sweep->add_option("--defense", sweep_defense, "none | rpd | lad-insert | lad-split");
    sweep->add_flag("--faa", sweep_faa, "apply the filter assisted attack");
    sweep->add_flag("--all", sweep_all, "run every defense/attack cell concurrently");
    sweep->add_option("--grid", sweep_grid, "comma separated P_t grid");
    sweep->add_option("--attacker-x", sweep_ax);
    sweep->add_option("--defender-x", sweep_dx);
    sweep->add_option("--s-min", sweep_smin);
    sweep->add_option("--s-max", sweep_smax);
    sweep->add_option("--range", sweep_range, "small | medium | large preset");
    sweep->add_option("--split-floor", sweep_floor);
    add_model_opts(sweep, sweep_opts);
    sweep->add_option("-o,--output", sweep_out)->required();

    // ---- roc
    auto* roc_cmd = app.add_subcommand("roc", "open-world ROC curve");
    std::string roc_in, roc_defense = "none", roc_out, roc_range;
    bool roc_faa = false;
    double roc_pt = 0.5;
    int roc_thresholds = 101, roc_ax = 30, roc_dx = 30, roc_floor = 100, roc_smin = 1,
        roc_smax = 1514;
    CommonModelOpts roc_opts;
    roc_cmd->set_config("--config");
    roc_cmd->add_option("--input", roc_in, "open-world dataset")->required();
    roc_cmd->add_option("--defense", roc_defense);
    roc_cmd->add_flag("--faa", roc_faa);
    roc_cmd->add_option("--p-t", roc_pt);
    roc_cmd->add_option("--thresholds", roc_thresholds);
    roc_cmd->add_option("--attacker-x", roc_ax);
    roc_cmd->add_option("--defender-x", roc_dx);
    roc_cmd->add_option("--s-min", roc_smin);
    roc_cmd->add_option("--s-max", roc_smax);
    roc_cmd->add_option("--range", roc_range);
    roc_cmd->add_option("--split-floor", roc_floor);
    add_model_opts(roc_cmd, roc_opts);
    roc_cmd->add_option("-o,--output", roc_out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            Dataset ds = unmonitored > 0 ? gen_open_world(wcfg, unmonitored)
                                         : gen_closed_world(wcfg);
            write_csv_dataset(ds, out_path(synth_out));
            std::cout << "wrote " << ds.traces.size() << " traces to " << out_path(synth_out)
                      << "\n";
        } else if (*ingest) {
            ClientIdentity who = parse_client_ip(client_ip);
            Dataset ds;
            int max_site = -1;
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(pcap_dir))
                if (e.path().extension() == ".pcap") files.push_back(e.path());
            std::sort(files.begin(), files.end());
            for (const fs::path& p : files) {
                std::string stem = p.stem().string();
                std::size_t us = stem.rfind('_');
                std::string label_tok = us == std::string::npos ? stem : stem.substr(0, us);
                try {
                    Trace t = parse_pcap_file(p.string(), who);
                    if (label_tok == "unmon") {
                        t.label = Label::unmonitored();
                        ds.open_world = true;
                    } else {
                        t.label = Label::monitored(std::stoi(label_tok));
                        max_site = std::max(max_site, t.label.site_index);
                    }
                    ds.traces.push_back(std::move(t));
                } catch (const std::exception& e) {
                    std::cerr << "warning: skipping " << p << ": " << e.what() << "\n";
                }
            }
            if (ds.traces.empty()) {
                std::cerr << "error: no usable pcap files in " << pcap_dir << "\n";
                return 1;
            }
            ds.class_count = max_site + 1;
            write_csv_dataset(ds, out_path(ingest_out));
            std::cout << "wrote " << ds.traces.size() << " traces to " << out_path(ingest_out)
                      << "\n";
        } else if (*stats) {
            Dataset ds = read_csv_dataset(stats_in);
            SizeHistogram h = build_histogram(ds);
            write_histogram_csv(h, out_path(hist_out));
            FilterList fl = top_x(h, stats_x);
            write_filter_csv(fl, out_path(filter_out));
            std::cout << h.distinct() << " distinct sizes, top " << stats_x << " written\n";
        } else if (*defend) {
            apply_range_preset(range_preset, defend_smin, defend_smax);
            Dataset ds = read_csv_dataset(defend_in);
            Dataset corpus = defend_corpus.empty() ? ds : read_csv_dataset(defend_corpus);
            DefenseConfig cfg;
            cfg.kind = parse_kind(defense_name);
            cfg.rpd = RpdConfig{defend_pt, defend_smin, defend_smax};
            if (cfg.kind == DefenseConfig::Kind::LadInsert ||
                cfg.kind == DefenseConfig::Kind::LadSplit) {
                cfg.lad.p_t = defend_pt;
                cfg.lad.s_min = defend_floor;
                cfg.lad.mode = cfg.kind == DefenseConfig::Kind::LadSplit ? LadMode::Split
                                                                        : LadMode::Insert;
                cfg.lad.list = build_filter(corpus, defend_x);
            }
            std::vector<DefendedTrace> defended = defend_dataset(ds, cfg, defend_seed);
            Dataset stripped;
            stripped.class_count = ds.class_count;
            stripped.open_world = ds.open_world;
            for (const DefendedTrace& d : defended) stripped.traces.push_back(strip_provenance(d));
            write_csv_dataset(stripped, out_path(defend_out));
            if (!sidecar_out.empty()) write_provenance(defended, out_path(sidecar_out));
            std::cout << "overhead: " << overhead(ds, defended, 40) << "\n";
        } else if (*attack) {
            Dataset ds = read_csv_dataset(attack_in);
            Dataset corpus = read_csv_dataset(attack_corpus);
            Dataset filtered = filter_dataset(ds, build_filter(corpus, attack_x));
            // the CSV format has no empty-trace row; unclassifiable traces are dropped
            std::size_t before = filtered.traces.size();
            std::erase_if(filtered.traces, [](const Trace& t) { return t.empty(); });
            if (filtered.traces.size() != before)
                std::cerr << "warning: dropped " << before - filtered.traces.size()
                          << " fully filtered traces\n";
            write_csv_dataset(filtered, out_path(attack_out));
        } else if (*train) {
            Dataset ds = read_csv_dataset(train_in);
            Dataset tr, te;
            split_train_test(ds, train_opts.split_ratio, train_opts.seed, tr, te);
            SweepOptions opt = to_sweep_options(train_opts, 30, 30, RpdConfig{}, 100, {0.0});
            CnnArchitecture arch;
            arch.input_len = opt.feature_len;
            arch.num_classes = tr.class_count;
            arch.channels = opt.channels;
            CnnModel model(arch, opt.train.seed);
            std::vector<std::vector<double>> xs;
            std::vector<int> ys;
            for (const Trace& t : tr.traces) {
                xs.push_back(vectorize(t, opt.feature_len));
                ys.push_back(t.label.site_index);
            }
            std::vector<double> losses = model.train(xs, ys, opt.train);
            model.save(out_path(model_out));
            if (!loss_out.empty()) {
                std::ofstream out(out_path(loss_out));
                out << "# wf-loss v1\nepoch,loss\n";
                for (std::size_t e = 0; e < losses.size(); ++e) out << e << ',' << losses[e] << '\n';
            }
            double acc = 0;
            int monitored_test = 0;
            for (const Trace& t : te.traces)
                if (t.label.is_monitored()) ++monitored_test;
            if (monitored_test > 0) {
                Dataset closed = te;
                std::erase_if(closed.traces, [](const Trace& t) { return !t.label.is_monitored(); });
                acc = evaluate_closed(model, closed, opt.feature_len).accuracy;
            }
            std::cout << "final loss " << losses.back() << ", held-out accuracy " << acc << "\n";
        } else if (*eval) {
            CnnModel model = CnnModel::load(eval_model);
            Dataset ds = read_csv_dataset(eval_in);
            Dataset closed = ds;
            std::erase_if(closed.traces, [](const Trace& t) { return !t.label.is_monitored(); });
            EvalResult r = evaluate_closed(model, closed, model.feature_len());
            std::cout << "accuracy: " << r.accuracy << "\n";
            if (!eval_orig.empty() && !eval_sidecar.empty()) {
                Dataset orig = read_csv_dataset(eval_orig);
                std::vector<DefendedTrace> defended = read_provenance(ds, eval_sidecar);
                std::cout << "overhead: " << overhead(orig, defended, header_bytes) << "\n";
            }
        } else if (*sweep) {
            apply_range_preset(sweep_range, sweep_smin, sweep_smax);
            Dataset ds = read_csv_dataset(sweep_in);
            Dataset tr, te;
            split_train_test(ds, sweep_opts.split_ratio, sweep_opts.seed, tr, te);
            std::erase_if(te.traces, [](const Trace& t) { return !t.label.is_monitored(); });
            SweepOptions opt =
                to_sweep_options(sweep_opts, sweep_ax, sweep_dx,
                                 RpdConfig{0.0, sweep_smin, sweep_smax}, sweep_floor,
                                 parse_grid(sweep_grid));

            std::vector<std::pair<DefenseConfig::Kind, bool>> cells;
            if (sweep_all) {
                for (auto kind : {DefenseConfig::Kind::None, DefenseConfig::Kind::Rpd,
                                  DefenseConfig::Kind::LadInsert, DefenseConfig::Kind::LadSplit})
                    for (bool faa : {false, true}) cells.emplace_back(kind, faa);
            } else {
                cells.emplace_back(parse_kind(sweep_defense), sweep_faa);
            }

            std::vector<SweepResult> results(cells.size());
            int workers = thread_count();
            std::size_t next = 0;
            while (next < cells.size()) {
                std::vector<std::future<void>> batch;
                for (int w = 0; w < workers && next < cells.size(); ++w, ++next) {
                    std::size_t i = next;
                    batch.push_back(std::async(std::launch::async, [&, i] {
                        results[i] = accuracy_sweep(tr, te, cells[i].first, cells[i].second, opt);
                    }));
                }
                for (auto& f : batch) f.get();
            }

            std::ofstream out(out_path(sweep_out));
            out << "# wf-sweep v1\np_t,accuracy,tag\n";
            for (const SweepResult& r : results)
                for (const auto& [p, a] : r.points) out << p << ',' << a << ',' << r.tag << '\n';
            for (const SweepResult& r : results)
                std::cout << "DE(" << r.tag
                          << ") = " << defensive_efficiency(r, 1.0 / te.traces.size()) << "\n";
        } else if (*roc_cmd) {
            apply_range_preset(roc_range, roc_smin, roc_smax);
            Dataset ds = read_csv_dataset(roc_in);
            Dataset tr, te;
            split_train_test(ds, roc_opts.split_ratio, roc_opts.seed, tr, te);
            SweepOptions opt = to_sweep_options(roc_opts, roc_ax, roc_dx,
                                                RpdConfig{0.0, roc_smin, roc_smax}, roc_floor,
                                                {roc_pt});
            FilterList attacker_list = build_filter(tr, opt.attacker_x);
            FilterList defender_list = build_filter(tr, opt.defender_x);
            Dataset model_train = roc_faa ? filter_dataset(tr, attacker_list) : tr;
            CnnModel model = train_cnn_on(model_train, opt);

            DefenseConfig cfg = make_defense(parse_kind(roc_defense), roc_pt, opt, defender_list);
            Dataset prepared = defend_and_strip(te, cfg, opt.defense_seed);
            if (roc_faa) prepared = filter_dataset(prepared, attacker_list);
            std::vector<double> scores;
            std::vector<bool> monitored;
            open_world_scores(model, prepared, opt.feature_len, scores, monitored);
            RocCurve curve = roc(scores, monitored, threshold_grid(0.0, 1.0, roc_thresholds));
            write_roc_csv(curve, out_path(roc_out));
            std::cout << "auc: " << curve.auc << "\n";
        }
    } catch (const BadConfig& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const XOutOfRange& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const BadRange& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const MalformedRow& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
