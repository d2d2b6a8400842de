#include "wf/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace wf {

std::vector<double> vectorize(const Trace& t, int f) {
    if (f < 1) throw std::invalid_argument("feature length must be >= 1");
    std::vector<double> v(static_cast<std::size_t>(f), 0.0);
    std::size_t n = std::min(t.sizes.size(), static_cast<std::size_t>(f));
    for (std::size_t i = 0; i < n; ++i)
        v[i] = static_cast<double>(t.sizes[i]) / static_cast<double>(kMaxWireSize);
    return v;
}

int argmax_class(const std::vector<double>& proba) {
    return static_cast<int>(std::max_element(proba.begin(), proba.end()) - proba.begin());
}

double monitored_score(const std::vector<double>& proba) {
    return *std::max_element(proba.begin(), proba.end());
}

// ---------------------------------------------------------------- k-NN

namespace {
double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double x = a[i] - b[i];
        d += x * x;
    }
    return d;
}
}  // namespace

KnnModel knn_fit(const Dataset& train, int f, int k) {
    if (train.empty()) throw EmptyTrainingSet{};
    if (k < 1 || static_cast<std::size_t>(k) > train.traces.size())
        throw std::invalid_argument("k outside [1, training size]");
    KnnModel m;
    m.k = k;
    m.f = f;
    m.classes = train.class_count;
    for (const Trace& t : train.traces) {
        if (!t.label.is_monitored())
            throw std::invalid_argument("k-NN training set must be monitored-only");
        m.vectors.push_back(vectorize(t, f));
        m.labels.push_back(t.label.site_index);
    }
    return m;
}

std::vector<double> KnnModel::predict_proba(const std::vector<double>& v) const {
    if (static_cast<int>(v.size()) != f) throw ShapeMismatch("query length != feature length");
    std::vector<std::pair<double, std::size_t>> dist;  // (squared distance, index)
    dist.reserve(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) dist.emplace_back(sq_dist(v, vectors[i]), i);
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::vector<double> votes(static_cast<std::size_t>(classes), 0.0);
    for (int i = 0; i < k; ++i) votes[static_cast<std::size_t>(labels[dist[i].second])] += 1.0 / k;
    return votes;
}

std::pair<int, double> KnnModel::predict(const std::vector<double>& v) const {
    if (static_cast<int>(v.size()) != f) throw ShapeMismatch("query length != feature length");
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) dist.emplace_back(sq_dist(v, vectors[i]), i);
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

    std::vector<int> count(static_cast<std::size_t>(classes), 0);
    std::vector<double> dsum(static_cast<std::size_t>(classes), 0.0);
    for (int i = 0; i < k; ++i) {
        int lab = labels[dist[i].second];
        ++count[static_cast<std::size_t>(lab)];
        dsum[static_cast<std::size_t>(lab)] += std::sqrt(dist[i].first);
    }
    int best = -1;
    for (int c = 0; c < classes; ++c) {
        if (count[c] == 0) continue;
        if (best < 0) {
            best = c;
            continue;
        }
        if (count[c] > count[best]) {
            best = c;
        } else if (count[c] == count[best]) {
            double mc = dsum[c] / count[c], mb = dsum[best] / count[best];
            if (mc < mb) best = c;  // equal mean keeps the smaller index
        }
    }
    return {best, static_cast<double>(count[best]) / k};
}

// ---------------------------------------------------------------- CNN

int CnnArchitecture::flat_len() const {
    if (num_classes < 1) throw ShapeMismatch("num_classes must be >= 1");
    if (channels.empty()) throw ShapeMismatch("at least one conv unit required");
    int len = input_len;
    for (std::size_t u = 0; u < channels.size(); ++u) {
        len -= 2 * (kernel - 1);  // two valid convolutions
        if (len < 1)
            throw ShapeMismatch("input length " + std::to_string(input_len) +
                                " collapses at unit " + std::to_string(u));
        len /= pool;
        if (len < 1)
            throw ShapeMismatch("input length " + std::to_string(input_len) +
                                " collapses at pool " + std::to_string(u));
    }
    return len * channels.back();
}

CnnModel::CnnModel(const CnnArchitecture& arch, std::uint64_t seed) : arch_(arch) {
    int flat = arch_.flat_len();  // validates shapes
    SeededRng rng(seed);
    auto uniform = [&rng](double bound) { return (2.0 * rng.randr() - 1.0) * bound; };

    int in_ch = 1;
    for (int ch : arch_.channels) {
        for (int half = 0; half < 2; ++half) {
            Conv c;
            c.in_ch = half == 0 ? in_ch : ch;
            c.out_ch = ch;
            c.k = arch_.kernel;
            c.w.resize(static_cast<std::size_t>(c.out_ch) * c.in_ch * c.k);
            c.b.assign(static_cast<std::size_t>(c.out_ch), 0.0);
            double bound = std::sqrt(1.0 / (c.in_ch * c.k));  // fan-in scaled
            for (double& w : c.w) w = uniform(bound);
            convs_.push_back(std::move(c));
        }
        in_ch = ch;
    }
    dense_.in = flat;
    dense_.out = arch_.num_classes;
    dense_.w.resize(static_cast<std::size_t>(flat) * arch_.num_classes);
    dense_.b.assign(static_cast<std::size_t>(arch_.num_classes), 0.0);
    double bound = std::sqrt(1.0 / flat);
    for (double& w : dense_.w) w = uniform(bound);
}

namespace {

// Channel-major activation buffer: data[c * len + i].
struct Activation {
    int ch = 0, len = 0;
    std::vector<double> data;
    void resize(int c, int l) {
        ch = c;
        len = l;
        data.assign(static_cast<std::size_t>(c) * l, 0.0);
    }
    double& at(int c, int i) { return data[static_cast<std::size_t>(c) * len + i]; }
    double at(int c, int i) const { return data[static_cast<std::size_t>(c) * len + i]; }
};

void conv_forward(const CnnModel::Conv& c, const Activation& in, Activation& out) {
    int out_len = in.len - c.k + 1;
    out.resize(c.out_ch, out_len);
    for (int o = 0; o < c.out_ch; ++o) {
        const double* wbase = c.w.data() + static_cast<std::size_t>(o) * c.in_ch * c.k;
        for (int i = 0; i < out_len; ++i) {
            double acc = c.b[o];
            for (int ic = 0; ic < c.in_ch; ++ic) {
                const double* w = wbase + static_cast<std::size_t>(ic) * c.k;
                const double* x = in.data.data() + static_cast<std::size_t>(ic) * in.len + i;
                for (int t = 0; t < c.k; ++t) acc += w[t] * x[t];
            }
            out.at(o, i) = acc;
        }
    }
}

void relu_forward(Activation& a) {
    for (double& v : a.data)
        if (v < 0) v = 0;
}

void pool_forward(const Activation& in, int p, Activation& out, std::vector<int>* argmax) {
    int out_len = in.len / p;
    out.resize(in.ch, out_len);
    if (argmax) argmax->assign(static_cast<std::size_t>(in.ch) * out_len, 0);
    for (int c = 0; c < in.ch; ++c)
        for (int i = 0; i < out_len; ++i) {
            int best = i * p;
            for (int t = 1; t < p; ++t)
                if (in.at(c, i * p + t) > in.at(c, best)) best = i * p + t;
            out.at(c, i) = in.at(c, best);
            if (argmax) (*argmax)[static_cast<std::size_t>(c) * out_len + i] = best;
        }
}

std::vector<double> softmax(const std::vector<double>& z) {
    double mx = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - mx);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

}  // namespace

// Per-sample forward record for backprop.
struct CnnTape {
    std::vector<Activation> pre;   // conv outputs before relu, per conv layer
    std::vector<Activation> post;  // after relu
    std::vector<Activation> pooled;
    std::vector<std::vector<int>> argmax;
    Activation input;
    std::vector<double> flat;
    std::vector<double> logits;
    std::vector<double> proba;

    static void forward(const CnnModel& m, const std::vector<CnnModel::Conv>& convs,
                        const CnnModel::Dense& dense, const CnnArchitecture& arch,
                        const std::vector<double>& x, CnnTape* tape, std::vector<double>& proba_out);
};

void CnnTape::forward(const CnnModel&, const std::vector<CnnModel::Conv>& convs,
                      const CnnModel::Dense& dense, const CnnArchitecture& arch,
                      const std::vector<double>& x, CnnTape* tape,
                      std::vector<double>& proba_out) {
    Activation cur;
    cur.resize(1, static_cast<int>(x.size()));
    std::copy(x.begin(), x.end(), cur.data.begin());
    if (tape) tape->input = cur;

    Activation next;
    for (std::size_t li = 0; li < convs.size(); ++li) {
        conv_forward(convs[li], cur, next);
        if (tape) tape->pre.push_back(next);
        relu_forward(next);
        if (tape) tape->post.push_back(next);
        if (li % 2 == 1) {
            Activation pooled;
            std::vector<int> am;
            pool_forward(next, arch.pool, pooled, tape ? &am : nullptr);
            if (tape) {
                tape->pooled.push_back(pooled);
                tape->argmax.push_back(std::move(am));
            }
            cur = std::move(pooled);
        } else {
            cur = std::move(next);
        }
    }

    std::vector<double> flat(cur.data.begin(), cur.data.end());
    std::vector<double> logits(static_cast<std::size_t>(dense.out), 0.0);
    for (int o = 0; o < dense.out; ++o) {
        double acc = dense.b[o];
        const double* w = dense.w.data() + static_cast<std::size_t>(o) * dense.in;
        for (int i = 0; i < dense.in; ++i) acc += w[i] * flat[i];
        logits[o] = acc;
    }
    proba_out = softmax(logits);
    if (tape) {
        tape->flat = std::move(flat);
        tape->logits = std::move(logits);
        tape->proba = proba_out;
    }
}

std::vector<double> CnnModel::predict_proba(const std::vector<double>& v) const {
    if (static_cast<int>(v.size()) != arch_.input_len)
        throw ShapeMismatch("input length != architecture input length");
    std::vector<double> proba;
    CnnTape::forward(*this, convs_, dense_, arch_, v, nullptr, proba);
    return proba;
}

namespace {

struct Grads {
    std::vector<CnnModel::Conv> convs;  // weights reused as gradient storage
    CnnModel::Dense dense;

    static Grads zeros_like(const std::vector<CnnModel::Conv>& convs, const CnnModel::Dense& d) {
        Grads g;
        g.convs = convs;
        for (auto& c : g.convs) {
            std::fill(c.w.begin(), c.w.end(), 0.0);
            std::fill(c.b.begin(), c.b.end(), 0.0);
        }
        g.dense = d;
        std::fill(g.dense.w.begin(), g.dense.w.end(), 0.0);
        std::fill(g.dense.b.begin(), g.dense.b.end(), 0.0);
        return g;
    }
};

// Backprop one sample into g; returns the sample loss.
double backward_sample(const std::vector<CnnModel::Conv>& convs, const CnnModel::Dense& dense,
                       const CnnArchitecture& arch, const CnnTape& tape, int label, Grads& g) {
    double loss = -std::log(std::max(tape.proba[static_cast<std::size_t>(label)], 1e-300));

    // dL/dlogits = proba - onehot
    std::vector<double> dlogits = tape.proba;
    dlogits[static_cast<std::size_t>(label)] -= 1.0;

    std::vector<double> dflat(static_cast<std::size_t>(dense.in), 0.0);
    for (int o = 0; o < dense.out; ++o) {
        double dz = dlogits[o];
        g.dense.b[o] += dz;
        double* gw = g.dense.w.data() + static_cast<std::size_t>(o) * dense.in;
        const double* w = dense.w.data() + static_cast<std::size_t>(o) * dense.in;
        for (int i = 0; i < dense.in; ++i) {
            gw[i] += dz * tape.flat[i];
            dflat[i] += dz * w[i];
        }
    }

    // Gradient flowing backwards through the conv stack.
    Activation dcur;
    const Activation& last = tape.pooled.back();
    dcur.resize(last.ch, last.len);
    std::copy(dflat.begin(), dflat.end(), dcur.data.begin());

    for (int li = static_cast<int>(convs.size()) - 1; li >= 0; --li) {
        if (li % 2 == 1) {
            // un-pool: route gradient to the argmax positions
            std::size_t unit = static_cast<std::size_t>(li / 2);
            const Activation& post = tape.post[static_cast<std::size_t>(li)];
            Activation dpost;
            dpost.resize(post.ch, post.len);
            const std::vector<int>& am = tape.argmax[unit];
            int plen = post.len / arch.pool;
            for (int c = 0; c < post.ch; ++c)
                for (int i = 0; i < plen; ++i)
                    dpost.at(c, am[static_cast<std::size_t>(c) * plen + i]) += dcur.at(c, i);
            dcur = std::move(dpost);
        }
        // relu
        const Activation& pre = tape.pre[static_cast<std::size_t>(li)];
        for (std::size_t i = 0; i < dcur.data.size(); ++i)
            if (pre.data[i] <= 0) dcur.data[i] = 0;
        // conv backward
        const CnnModel::Conv& c = convs[static_cast<std::size_t>(li)];
        const Activation& in =
            li == 0 ? tape.input
                    : (li % 2 == 0 ? tape.pooled[static_cast<std::size_t>(li / 2 - 1)]
                                   : tape.post[static_cast<std::size_t>(li - 1)]);
        CnnModel::Conv& gc = g.convs[static_cast<std::size_t>(li)];
        Activation din;
        din.resize(in.ch, in.len);
        int out_len = dcur.len;
        for (int o = 0; o < c.out_ch; ++o) {
            const double* wbase = c.w.data() + static_cast<std::size_t>(o) * c.in_ch * c.k;
            double* gwbase = gc.w.data() + static_cast<std::size_t>(o) * c.in_ch * c.k;
            for (int i = 0; i < out_len; ++i) {
                double dz = dcur.at(o, i);
                if (dz == 0.0) continue;
                gc.b[o] += dz;
                for (int ic = 0; ic < c.in_ch; ++ic) {
                    const double* x = in.data.data() + static_cast<std::size_t>(ic) * in.len + i;
                    double* dx = din.data.data() + static_cast<std::size_t>(ic) * in.len + i;
                    const double* w = wbase + static_cast<std::size_t>(ic) * c.k;
                    double* gw = gwbase + static_cast<std::size_t>(ic) * c.k;
                    for (int t = 0; t < c.k; ++t) {
                        gw[t] += dz * x[t];
                        dx[t] += dz * w[t];
                    }
                }
            }
        }
        dcur = std::move(din);
    }
    return loss;
}

}  // namespace

double CnnModel::batch_loss(const std::vector<std::vector<double>>& xs,
                            const std::vector<int>& ys) const {
    double total = 0.0;
    std::vector<double> proba;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CnnTape::forward(*this, convs_, dense_, arch_, xs[i], nullptr, proba);
        total += -std::log(std::max(proba[static_cast<std::size_t>(ys[i])], 1e-300));
    }
    return total / static_cast<double>(xs.size());
}

std::vector<double> CnnModel::batch_gradient(const std::vector<std::vector<double>>& xs,
                                             const std::vector<int>& ys) const {
    Grads g = Grads::zeros_like(convs_, dense_);
    std::vector<double> proba;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CnnTape tape;
        CnnTape::forward(*this, convs_, dense_, arch_, xs[i], &tape, proba);
        backward_sample(convs_, dense_, arch_, tape, ys[i], g);
    }
    std::vector<double> flat;
    double inv = 1.0 / static_cast<double>(xs.size());
    for (const Conv& c : g.convs) {
        for (double v : c.w) flat.push_back(v * inv);
        for (double v : c.b) flat.push_back(v * inv);
    }
    for (double v : g.dense.w) flat.push_back(v * inv);
    for (double v : g.dense.b) flat.push_back(v * inv);
    return flat;
}

std::vector<double*> CnnModel::parameters() {
    std::vector<double*> ps;
    for (Conv& c : convs_) {
        for (double& v : c.w) ps.push_back(&v);
        for (double& v : c.b) ps.push_back(&v);
    }
    for (double& v : dense_.w) ps.push_back(&v);
    for (double& v : dense_.b) ps.push_back(&v);
    return ps;
}

std::vector<double> CnnModel::train(const std::vector<std::vector<double>>& xs,
                                    const std::vector<int>& ys, const TrainConfig& cfg) {
    if (xs.empty()) throw EmptyTrainingSet{};
    if (xs.size() != ys.size()) throw ShapeMismatch("sample/label count mismatch");
    for (const auto& x : xs)
        if (static_cast<int>(x.size()) != arch_.input_len)
            throw ShapeMismatch("sample length != architecture input length");
    for (int y : ys)
        if (y < 0 || y >= arch_.num_classes) throw ShapeMismatch("label out of range");

    std::vector<double*> params = parameters();
    std::vector<double> m(params.size(), 0.0), v(params.size(), 0.0);
    long long step = 0;

    SeededRng shuffle_rng(SeededRng::derive(cfg.seed, 0x51u));
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> epoch_loss;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with the run RNG: fixed shuffle order per seed.
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng.randi(0, static_cast<int>(i) - 1))]);

        double loss_sum = 0.0;
        std::size_t count = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t end = std::min(order.size(), start + cfg.batch_size);
            Grads g = Grads::zeros_like(convs_, dense_);
            std::vector<double> proba;
            for (std::size_t bi = start; bi < end; ++bi) {
                CnnTape tape;
                CnnTape::forward(*this, convs_, dense_, arch_, xs[order[bi]], &tape, proba);
                loss_sum += backward_sample(convs_, dense_, arch_, tape, ys[order[bi]], g);
                ++count;
            }
            double inv = 1.0 / static_cast<double>(end - start);
            std::vector<double> flat;
            flat.reserve(params.size());
            for (const Conv& c : g.convs) {
                for (double gv : c.w) flat.push_back(gv * inv);
                for (double gv : c.b) flat.push_back(gv * inv);
            }
            for (double gv : g.dense.w) flat.push_back(gv * inv);
            for (double gv : g.dense.b) flat.push_back(gv * inv);

            ++step;
            double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            for (std::size_t i = 0; i < params.size(); ++i) {
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * flat[i];
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * flat[i] * flat[i];
                double mhat = m[i] / bc1;
                double vhat = v[i] / bc2;
                *params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
            }
        }
        double mean = loss_sum / static_cast<double>(count);
        if (!std::isfinite(mean)) throw DivergedLoss{};
        epoch_loss.push_back(mean);
    }
    return epoch_loss;
}

void CnnModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# wf-cnn v1\n";
    out << arch_.input_len << ' ' << arch_.num_classes << ' ' << arch_.kernel << ' '
        << arch_.pool << ' ' << arch_.channels.size();
    for (int c : arch_.channels) out << ' ' << c;
    out << '\n';
    out << std::setprecision(17);
    for (const Conv& c : convs_) {
        for (double w : c.w) out << w << '\n';
        for (double b : c.b) out << b << '\n';
    }
    for (double w : dense_.w) out << w << '\n';
    for (double b : dense_.b) out << b << '\n';
}

CnnModel CnnModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string header;
    std::getline(in, header);
    if (header != "# wf-cnn v1") throw std::runtime_error("bad model file header");
    CnnArchitecture arch;
    std::size_t units = 0;
    in >> arch.input_len >> arch.num_classes >> arch.kernel >> arch.pool >> units;
    arch.channels.resize(units);
    for (std::size_t i = 0; i < units; ++i) in >> arch.channels[i];
    CnnModel m(arch, 0);
    for (double* p : m.parameters())
        if (!(in >> *p)) throw std::runtime_error("model file truncated");
    return m;
}

// ---------------------------------------------------------------- eval

EvalResult evaluate_closed(const Classifier& m, const Dataset& test, int f) {
    EvalResult r;
    int c = m.num_classes();
    r.confusion.assign(static_cast<std::size_t>(c), std::vector<int>(static_cast<std::size_t>(c), 0));
    int correct = 0, total = 0;
    for (const Trace& t : test.traces) {
        if (!t.label.is_monitored())
            throw std::invalid_argument("closed-world evaluation needs monitored labels");
        int pred = argmax_class(m.predict_proba(vectorize(t, f)));
        ++r.confusion[static_cast<std::size_t>(t.label.site_index)][static_cast<std::size_t>(pred)];
        if (pred == t.label.site_index) ++correct;
        ++total;
    }
    r.accuracy = total == 0 ? 0.0 : static_cast<double>(correct) / total;
    return r;
}

void split_train_test(const Dataset& ds, double ratio, std::uint64_t seed, Dataset& train,
                      Dataset& test) {
    train = Dataset{{}, ds.class_count, false};
    test = Dataset{{}, ds.class_count, ds.open_world};
    std::vector<std::vector<std::size_t>> per_class(static_cast<std::size_t>(ds.class_count));
    for (std::size_t i = 0; i < ds.traces.size(); ++i) {
        const Trace& t = ds.traces[i];
        if (t.label.is_monitored())
            per_class[static_cast<std::size_t>(t.label.site_index)].push_back(i);
        else
            test.traces.push_back(t);
    }
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        auto& idx = per_class[c];
        SeededRng rng(SeededRng::derive(seed, c));
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.randi(0, static_cast<int>(i) - 1))]);
        std::size_t cut = static_cast<std::size_t>(ratio * static_cast<double>(idx.size()) + 0.5);
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < cut ? train : test).traces.push_back(ds.traces[idx[i]]);
    }
}

}  // namespace wf
