#include "wf/synth.hpp"

#include "wf/rng.hpp"

namespace wf {

std::vector<std::pair<int, double>> default_alphabet() {
    std::vector<std::pair<int, double>> a = {
        {-1514, 0.20}, {1514, 0.10}, {-1460, 0.12}, {1460, 0.06}, {52, 0.10}, {-52, 0.08},
    };
    // 17 magnitude levels in both directions, 0.01 each, total 0.34.
    const int tail[] = {60,  80,  100, 150, 200, 250, 300, 350, 400,
                        450, 500, 600, 700, 800, 900, 1000, 1100};
    for (int m : tail) {
        a.emplace_back(m, 0.01);
        a.emplace_back(-m, 0.01);
    }
    return a;
}

namespace {

struct AlphabetSampler {
    std::vector<int> sizes;
    std::vector<double> cum;

    explicit AlphabetSampler(const std::vector<std::pair<int, double>>& alphabet) {
        double total = 0.0;
        for (const auto& [s, w] : alphabet) total += w;
        double run = 0.0;
        for (const auto& [s, w] : alphabet) {
            sizes.push_back(s);
            run += w / total;
            cum.push_back(run);
        }
        cum.back() = 1.0;
    }

    int draw(SeededRng& rng) const {
        double u = rng.randr();
        for (std::size_t i = 0; i < cum.size(); ++i)
            if (u < cum[i]) return sizes[i];
        return sizes.back();
    }
};

void check_config(const WorldConfig& cfg) {
    if (cfg.num_sites < 2) throw BadConfig("need at least 2 sites");
    if (cfg.traces_per_site < 2) throw BadConfig("need at least 2 traces per site");
    if (cfg.signature_len < 1) throw BadConfig("signature length must be >= 1");
    if (cfg.n_min < cfg.signature_len) throw BadConfig("n_min must be >= signature length");
    if (cfg.n_max < cfg.n_min) throw BadConfig("n_max must be >= n_min");
    if (cfg.drop_prob < 0 || cfg.drop_prob > 1 || cfg.resize_prob < 0 || cfg.resize_prob > 1)
        throw BadConfig("jitter probabilities must be in [0,1]");
}

std::vector<int> make_signature(const AlphabetSampler& alpha, int len, SeededRng& rng) {
    std::vector<int> sig(static_cast<std::size_t>(len));
    for (int& s : sig) s = alpha.draw(rng);
    return sig;
}

Trace make_trace(const AlphabetSampler& alpha, const std::vector<int>& sig,
                 const WorldConfig& cfg, Label label, SeededRng& rng) {
    Trace t;
    t.label = label;
    int target = rng.randi(cfg.n_min, cfg.n_max);
    for (int s : sig) {
        if (rng.randr() < cfg.drop_prob) continue;
        if (rng.randr() < cfg.resize_prob) s = alpha.draw(rng);
        t.sizes.push_back(s);
    }
    while (static_cast<int>(t.sizes.size()) < target) t.sizes.push_back(alpha.draw(rng));
    return t;
}

}  // namespace

Dataset gen_closed_world(const WorldConfig& cfg) {
    check_config(cfg);
    AlphabetSampler alpha(cfg.alphabet.empty() ? default_alphabet() : cfg.alphabet);

    Dataset ds;
    ds.class_count = cfg.num_sites;
    ds.open_world = false;
    for (int site = 0; site < cfg.num_sites; ++site) {
        SeededRng sig_rng(SeededRng::derive(cfg.seed, 0x100000ull + static_cast<std::uint64_t>(site)));
        std::vector<int> sig = make_signature(alpha, cfg.signature_len, sig_rng);
        for (int r = 0; r < cfg.traces_per_site; ++r) {
            SeededRng rng(SeededRng::derive(
                cfg.seed, static_cast<std::uint64_t>(site) * cfg.traces_per_site + r));
            ds.traces.push_back(make_trace(alpha, sig, cfg, Label::monitored(site), rng));
        }
    }
    return ds;
}

Dataset gen_open_world(const WorldConfig& cfg, int num_unmonitored) {
    if (num_unmonitored < 0) throw BadConfig("num_unmonitored must be >= 0");
    Dataset ds = gen_closed_world(cfg);
    if (num_unmonitored == 0) return ds;
    ds.open_world = true;
    AlphabetSampler alpha(cfg.alphabet.empty() ? default_alphabet() : cfg.alphabet);
    for (int u = 0; u < num_unmonitored; ++u) {
        // Fresh signature per unmonitored trace, used exactly once.
        SeededRng sig_rng(SeededRng::derive(cfg.seed, 0x200000ull + static_cast<std::uint64_t>(u)));
        std::vector<int> sig = make_signature(alpha, cfg.signature_len, sig_rng);
        SeededRng rng(SeededRng::derive(cfg.seed, 0x300000ull + static_cast<std::uint64_t>(u)));
        ds.traces.push_back(make_trace(alpha, sig, cfg, Label::unmonitored(), rng));
    }
    return ds;
}

}  // namespace wf
