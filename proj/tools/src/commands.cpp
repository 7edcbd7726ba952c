#include "rnn_surgery_cli/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "rnn_surgery/approx.hpp"
#include "rnn_surgery/combinators.hpp"
#include "rnn_surgery/conversion.hpp"
#include "rnn_surgery/errors.hpp"
#include "rnn_surgery/experiment.hpp"
#include "rnn_surgery/theory.hpp"
#include "rnn_surgery/windows.hpp"
#include "rnn_surgery/network_json.hpp"
#include "rnn_surgery_cli/io.hpp"

namespace rnn_surgery::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int thread_cap() {
    if (const char* env = std::getenv("RNN_SURGERY_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

Interval parse_domain(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw FormatError("--domain expects lo,hi");
    try {
        std::size_t used = 0;
        const double lo = std::stod(s.substr(0, comma), &used);
        const double hi = std::stod(s.substr(comma + 1));
        if (!(lo <= hi)) throw FormatError("--domain needs lo <= hi");
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw FormatError("--domain expects two numbers, got \"" + s + "\"");
    }
}

std::string shape(const AnyNetwork& net) {
    return std::visit(
        [](const auto& n) {
            std::ostringstream os;
            os << "W=" << n.width() << " L=" << n.depth();
            return os.str();
        },
        net);
}

void write_network(const fs::path& path, const AnyNetwork& net, long seq_len) {
    write_text(path, network_to_json(net, seq_len).dump(2) + "\n");
}

fs::path manifest_path_for(const fs::path& out) {
    fs::path p = out;
    return p.replace_extension(".manifest.json");
}

// ---------------------------------------------------------------- convert

struct ConvertOptions {
    fs::path in, out;
    std::string direction;
    long t0 = 0;
    std::optional<long> len;
    std::string domain = "0,1";
};

int cmd_convert(const ConvertOptions& o, std::ostream& out) {
    const json j = read_json_file(o.in);
    const AnyNetwork src = network_from_json(j);
    const std::optional<long> N = o.len ? o.len : network_seq_len(j);
    if (!N) throw FormatError("sequence length unknown: pass --len or set dims.N in the input");
    const Interval dom = parse_domain(o.domain);

    AnyNetwork result;
    if (o.direction == "fnn2rnn") {
        const auto* f = std::get_if<FeedforwardNet>(&src);
        if (!f) throw FormatError("fnn2rnn expects an fnn input, got " + network_kind(src));
        if (o.t0 < 1 || f->input_dim() % o.t0 != 0)
            throw DimensionError("FNN input dim " + std::to_string(f->input_dim()) + " is not d_x * t0");
        const Eigen::Index d_x = f->input_dim() / o.t0;
        const auto mrnn = fnn_to_mrnn(*f, o.t0, *N);
        result = mrnn_to_rnn(mrnn, InputDomain::uniform(d_x, *N, dom));
    } else if (o.direction == "rnn2fnn") {
        const auto* r = std::get_if<RecurrentNet>(&src);
        if (!r) throw FormatError("rnn2fnn expects an rnn input, got " + network_kind(src));
        result = rnn_to_fnn(r->output_clip ? materialize_clip(*r) : *r, o.t0, *N);
    } else if (o.direction == "mrnn2rnn") {
        ModifiedRecurrentNet m;
        if (const auto* p = std::get_if<ModifiedRecurrentNet>(&src)) {
            m = *p;
        } else if (const auto* r = std::get_if<RecurrentNet>(&src)) {
            m = ModifiedRecurrentNet::from_rnn(*r);
        } else {
            throw FormatError("mrnn2rnn expects an mrnn input, got " + network_kind(src));
        }
        result = mrnn_to_rnn(m, InputDomain::uniform(m.input_dim(), *N, dom));
    } else {
        throw FormatError("unknown direction \"" + o.direction + "\"");
    }

    write_network(o.out, result, *N);
    RunManifest manifest;
    manifest.command = "convert";
    manifest.config = {{"in", o.in.string()},   {"out", o.out.string()}, {"direction", o.direction},
                       {"t0", o.t0},            {"len", *N},             {"domain", {dom.lo, dom.hi}}};
    manifest.outputs = {o.out};
    write_manifest(manifest_path_for(o.out), manifest);

    out << o.direction << ": " << network_kind(src) << " " << shape(src) << " -> " << network_kind(result) << " "
        << shape(result) << "\n";
    return kOk;
}

// ---------------------------------------------------------------- verify

struct VerifyOptions {
    fs::path a, b;
    long t0 = 1;
    std::optional<long> len;
    long samples = 1000;
    std::uint64_t seed = 0;
    double threshold = 1e-8;
    std::string domain = "0,1";
    std::optional<fs::path> out;
};

// Outputs at step t0 for every sample; FNNs see vec(x[1:t0]).
SequenceMatrix evaluate_at(const AnyNetwork& net, const SequenceBatch& X, long t0) {
    if (const auto* f = std::get_if<FeedforwardNet>(&net)) {
        const Eigen::Index d = X.dim();
        SequenceMatrix flat(d * t0, X.size());
        for (long t = 0; t < t0; ++t) flat.middleRows(t * d, d) = X.steps[static_cast<std::size_t>(t)];
        return eval_fnn_batch(*f, flat);
    }
    if (const auto* r = std::get_if<RecurrentNet>(&net)) return eval_rnn_batch(*r, X)[static_cast<std::size_t>(t0 - 1)];
    return eval_mrnn_batch(std::get<ModifiedRecurrentNet>(net), X)[static_cast<std::size_t>(t0 - 1)];
}

Eigen::Index input_dim(const AnyNetwork& net) {
    return std::visit([](const auto& n) { return n.input_dim(); }, net);
}
Eigen::Index output_dim(const AnyNetwork& net) {
    return std::visit([](const auto& n) { return n.output_dim(); }, net);
}

int cmd_verify(const VerifyOptions& o, std::ostream& out) {
    const json ja = read_json_file(o.a);
    const json jb = read_json_file(o.b);
    const AnyNetwork a = network_from_json(ja);
    const AnyNetwork b = network_from_json(jb);
    if (o.samples < 1) throw FormatError("--samples must be positive");
    const Interval dom = parse_domain(o.domain);

    const bool a_fnn = std::holds_alternative<FeedforwardNet>(a);
    const bool b_fnn = std::holds_alternative<FeedforwardNet>(b);
    if (o.t0 < 1) throw DimensionError("t0 must be at least 1");
    Eigen::Index d_x = 0;
    if (!a_fnn) d_x = input_dim(a);
    else if (!b_fnn) d_x = input_dim(b);
    else {
        if (input_dim(a) % o.t0 != 0) throw DimensionError("FNN input dim is not a multiple of t0");
        d_x = input_dim(a) / o.t0;
    }
    for (const auto* n : {&a, &b}) {
        const bool fnn = std::holds_alternative<FeedforwardNet>(*n);
        const Eigen::Index expect = fnn ? d_x * o.t0 : d_x;
        if (input_dim(*n) != expect)
            throw DimensionError("operand input dim " + std::to_string(input_dim(*n)) + ", expected " +
                                 std::to_string(expect));
    }
    if (output_dim(a) != output_dim(b)) throw DimensionError("operands have different output dims");

    long N = o.t0;
    if (o.len) N = *o.len;
    else {
        if (auto n = network_seq_len(ja)) N = std::max(N, *n);
        if (auto n = network_seq_len(jb)) N = std::max(N, *n);
    }
    if (o.t0 > N) throw DimensionError("t0 = " + std::to_string(o.t0) + " exceeds N = " + std::to_string(N));

    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> u(dom.lo, dom.hi);
    double worst = 0.0;
    constexpr long chunk = 4096;
    for (long start = 0; start < o.samples; start += chunk) {
        const long count = std::min(chunk, o.samples - start);
        SequenceBatch X;
        for (long t = 0; t < N; ++t) {
            SequenceMatrix s(d_x, count);
            for (long k = 0; k < count; ++k)
                for (Eigen::Index i = 0; i < d_x; ++i) s(i, k) = u(rng);
            X.steps.push_back(std::move(s));
        }
        const SequenceMatrix ya = evaluate_at(a, X, o.t0);
        const SequenceMatrix yb = evaluate_at(b, X, o.t0);
        worst = std::max(worst, (ya - yb).cwiseAbs().maxCoeff());
    }
    const bool pass = worst <= o.threshold;
    out << "max |a - b| at t0=" << o.t0 << " over " << o.samples << " samples: " << format_double(worst) << "\n"
        << (pass ? "PASS" : "FAIL") << " (threshold " << format_double(o.threshold) << ")\n";

    if (o.out) {
        json report = {{"max_abs_diff", worst}, {"threshold", o.threshold}, {"pass", pass},
                       {"t0", o.t0},           {"N", N},                   {"samples", o.samples}};
        write_text(*o.out, report.dump(2) + "\n");
        RunManifest manifest;
        manifest.command = "verify";
        manifest.config = {{"a", o.a.string()}, {"b", o.b.string()}, {"t0", o.t0},
                           {"len", N},          {"samples", o.samples}, {"threshold", o.threshold},
                           {"domain", {dom.lo, dom.hi}}};
        manifest.seed = o.seed;
        manifest.outputs = {*o.out};
        write_manifest(manifest_path_for(*o.out), manifest);
    }
    return pass ? kOk : kVerifyFailed;
}

// ---------------------------------------------------------------- approx-demo

struct DemoOptions {
    std::optional<fs::path> config;
    fs::path out;
};

int cmd_approx_demo(const DemoOptions& o, std::ostream& out) {
    json cfg = o.config ? read_json_file(*o.config) : json::object();
    if (!cfg.is_object()) throw FormatError("approx-demo config must be a JSON object");
    const json targets_spec = cfg.value("targets", json("two-step"));
    const double K = cfg.value("K", 1.0);
    long d_x = cfg.value("d_x", 1L);
    long N = cfg.value("N", 2L);
    const auto resolutions = cfg.value("resolutions", std::vector<int>{2, 4, 8});
    const int grid_points = cfg.value("grid_points", 17);
    std::vector<approx::ApproxBudget> budgets;
    for (const auto& b : cfg.value("budgets", json::array({json{{"J", 2}, {"I_d", 3}}})))
        budgets.push_back({b.at("J").get<int>(), b.at("I_d").get<int>()});
    if (resolutions.empty() || budgets.empty()) throw FormatError("need at least one resolution and one budget");

    std::vector<approx::PastDependentTarget> targets;
    if (targets_spec.is_string() && targets_spec.get<std::string>() == "two-step") {
        targets = approx::two_step_demo();
        N = 2;
        d_x = 1;
    } else if (targets_spec.is_string()) {
        for (int t = 1; t <= N; ++t) targets.push_back(approx::catalog_target(targets_spec.get<std::string>(), t, d_x, K));
    } else if (targets_spec.is_array()) {
        N = static_cast<long>(targets_spec.size());
        for (int t = 1; t <= N; ++t)
            targets.push_back(approx::catalog_target(targets_spec[static_cast<std::size_t>(t - 1)].get<std::string>(), t,
                                                     d_x, K));
    } else {
        throw FormatError("targets must be a catalog name or a list of names");
    }

    std::ostringstream csv;
    csv << "t,resolution,J,I_d,measured_sup_error,width,depth\n";
    out << std::left << std::setw(4) << "t" << std::setw(12) << "resolution" << std::setw(4) << "J" << std::setw(5)
        << "I_d" << std::setw(24) << "sup_error" << std::setw(8) << "width" << "depth\n";
    for (const auto& budget : budgets) {
        for (int r : resolutions) {
            const auto s = approx::assemble_sequence_approximator(targets, budget, r);
            for (std::size_t t = 0; t < targets.size(); ++t) {
                const double e = approx::sup_error_on_grid(s.net, targets[t], grid_points);
                csv << t + 1 << ',' << r << ',' << budget.J << ',' << budget.I_d << ',' << format_double(e) << ','
                    << s.net.width() << ',' << s.net.depth() << '\n';
                out << std::setw(4) << t + 1 << std::setw(12) << r << std::setw(4) << budget.J << std::setw(5)
                    << budget.I_d << std::setw(24) << format_double(e) << std::setw(8) << s.net.width()
                    << s.net.depth() << "\n";
            }
        }
    }
    write_text(o.out, csv.str());

    json resolved = {{"targets", targets_spec}, {"K", K},   {"d_x", d_x}, {"N", N}, {"resolutions", resolutions},
                     {"grid_points", grid_points}, {"budgets", json::array()}};
    for (const auto& b : budgets) resolved["budgets"].push_back({{"J", b.J}, {"I_d", b.I_d}});
    RunManifest manifest;
    manifest.command = "approx-demo";
    manifest.config = resolved;
    manifest.outputs = {o.out};
    write_manifest(manifest_path_for(o.out), manifest);
    return kOk;
}

// ---------------------------------------------------------------- bounds

struct BoundsOptions {
    double W = 2, L = 2, K = 1, n = 10, delta = 0.1;
    double alpha = 0.0, beta = 1.0;
    long d_x = 1, N = 2;
    std::string kind = "exp_mixing";
    double r = 1.0;
};

int cmd_bounds(const BoundsOptions& o, std::ostream& out) {
    using namespace regression;
    const ScheduleParams p{o.alpha, o.beta, o.d_x, o.N, mixing_case_from_string(o.kind), o.r};
    const double cover = covering_bound(o.W, o.L, o.K, o.n, o.delta);
    const Schedule s = theory_schedule(o.n, p);
    auto row = [&out](const std::string& k, const std::string& v) { out << std::left << std::setw(18) << k << v << "\n"; };
    row("covering_bound", format_double(cover));
    row("case", to_string(p.kind));
    row("alpha", format_double(o.alpha));
    row("alpha_upper", format_double(alpha_upper(p)));
    row("depth_exponent", format_double(s.depth_exponent));
    row("schedule_W", std::to_string(s.W));
    row("schedule_L", std::to_string(s.L));
    row("rate_exponent", format_double(s.rate_exponent));
    return kOk;
}

// ---------------------------------------------------------------- regress

struct RegressOptions {
    fs::path config;
    fs::path out;
};

regression::RateExperimentConfig parse_regress_config(const json& j, json& resolved) {
    using namespace regression;
    if (!j.is_object()) throw FormatError("regress config must be a JSON object");
    RateExperimentConfig cfg;

    const json task = j.value("task", json::object());
    const std::string name = task.value("name", std::string("mean-sinusoid"));
    const long d_x = task.value("d_x", 1L);
    const long N = task.value("N", 2L);
    const double sigma = task.value("sigma", 0.1);
    const double K = task.value("K", 1.0);
    const double beta = task.value("beta", 1.0);
    const double constant = task.value("constant", 0.4);
    cfg.task = make_task(name, d_x, N, sigma, K, beta, constant);

    const json mix = j.value("mixing", json::object());
    cfg.mixing.kind = mixing_kind_from_string(mix.value("kind", std::string("iid")));
    cfg.mixing.rho = mix.value("rho", 0.0);
    cfg.mixing.d_x = d_x;
    cfg.mixing.validate();

    if (!j.contains("ns")) throw FormatError("regress config needs \"ns\"");
    cfg.ns = j.at("ns").get<std::vector<Eigen::Index>>();
    cfg.replications = j.value("replications", 3);

    const json tr = j.value("train", json::object());
    cfg.train.learning_rate = tr.value("learning_rate", 3e-3);
    cfg.train.epochs = tr.value("epochs", 300);
    cfg.train.restarts = tr.value("restarts", 1);
    cfg.train.validation_fraction = tr.value("validation_fraction", 0.2);
    cfg.train.optimizer = optimizer_from_string(tr.value("optimizer", std::string("adam")));
    cfg.train.keep_best_validation = tr.value("keep_best_validation", true);
    cfg.train.eval_every = tr.value("eval_every", 5);

    const json sc = j.value("schedule", json::object());
    cfg.schedule.kind = mixing_case_from_string(
        sc.value("case", std::string(cfg.mixing.kind == MixingKind::iid ? "iid" : "exp_mixing")));
    cfg.schedule.beta = beta;
    cfg.schedule.d_x = d_x;
    cfg.schedule.N = N;
    cfg.schedule.r = sc.value("r", 1.0);
    cfg.schedule.alpha = sc.contains("alpha") ? sc.at("alpha").get<double>() : alpha_upper(cfg.schedule);

    cfg.mc_size = j.value("mc_size", Eigen::Index{10000});
    cfg.seed = j.value("seed", std::uint64_t{0});
    const int cap = thread_cap();
    cfg.threads = std::min(cap, j.value("threads", cap));

    resolved = {
        {"task", {{"name", name}, {"d_x", d_x}, {"N", N}, {"sigma", sigma}, {"K", K}, {"beta", beta},
                  {"constant", constant}}},
        {"mixing", {{"kind", to_string(cfg.mixing.kind)}, {"rho", cfg.mixing.rho}}},
        {"ns", cfg.ns},
        {"replications", cfg.replications},
        {"train", {{"learning_rate", cfg.train.learning_rate}, {"epochs", cfg.train.epochs},
                   {"restarts", cfg.train.restarts}, {"validation_fraction", cfg.train.validation_fraction},
                   {"optimizer", to_string(cfg.train.optimizer)},
                   {"keep_best_validation", cfg.train.keep_best_validation}, {"eval_every", cfg.train.eval_every}}},
        {"schedule", {{"case", to_string(cfg.schedule.kind)}, {"alpha", cfg.schedule.alpha}, {"r", cfg.schedule.r}}},
        {"mc_size", cfg.mc_size},
        {"seed", cfg.seed},
    };
    return cfg;
}

int cmd_regress(const RegressOptions& o, std::ostream& out) {
    json resolved;
    const auto cfg = parse_regress_config(read_json_file(o.config), resolved);
    const auto result = regression::rate_experiment(cfg);

    std::ostringstream csv;
    csv << "n,replication,excess_risk,W,L,wall_seconds\n";
    for (const auto& r : result.runs)
        csv << r.n << ',' << r.replication << ',' << format_double(r.excess_risk) << ',' << r.W << ',' << r.L << ','
            << format_double(r.wall_seconds) << '\n';

    json summary;
    summary["slope"] = result.slope_fitted ? json(result.slope) : json(nullptr);
    summary["slope_fitted"] = result.slope_fitted;
    summary["theoretical_exponent"] = result.theoretical_exponent;
    summary["degenerate"] = result.degenerate;
    summary["rows"] = json::array();
    for (const auto& row : result.rows)
        summary["rows"].push_back(
            {{"n", row.n}, {"mean_risk", row.mean_risk}, {"std_risk", row.std_risk}, {"W", row.W}, {"L", row.L}});

    const fs::path csv_path = o.out / "runs.csv";
    const fs::path summary_path = o.out / "summary.json";
    write_text(csv_path, csv.str());
    write_text(summary_path, summary.dump(2) + "\n");
    RunManifest manifest;
    manifest.command = "regress";
    manifest.config = resolved;
    manifest.seed = cfg.seed;
    manifest.outputs = {csv_path, summary_path};
    write_manifest(o.out / "manifest.json", manifest);

    for (const auto& row : result.rows)
        out << "n=" << row.n << "  W=" << row.W << "  L=" << row.L << "  mean excess risk " << format_double(row.mean_risk)
            << "\n";
    out << "slope " << (result.slope_fitted ? format_double(result.slope) : std::string("not fitted"))
        << "  theoretical " << format_double(result.theoretical_exponent) << (result.degenerate ? "  (degenerate)" : "")
        << "\n";
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weight-level RNN/FNN conversions, approximation demos and rate experiments", "rnn_surgery"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);

    ConvertOptions conv;
    auto* c = app.add_subcommand("convert", "Convert a network between FNN, MRNN and RNN forms");
    c->add_option("--in", conv.in, "Input network JSON")->required();
    c->add_option("--out", conv.out, "Output network JSON")->required();
    c->add_option("--direction", conv.direction, "fnn2rnn, rnn2fnn or mrnn2rnn")
        ->required()
        ->check(CLI::IsMember({"fnn2rnn", "rnn2fnn", "mrnn2rnn"}));
    c->add_option("--t0", conv.t0, "Time step (1-based)");
    c->add_option("--len", conv.len, "Sequence length N (default: dims.N of the input)");
    c->add_option("--domain", conv.domain, "Token entry range lo,hi for the de-masking step")->capture_default_str();

    VerifyOptions ver;
    auto* v = app.add_subcommand("verify", "Compare two networks at step t0 on random sequences");
    v->add_option("a", ver.a, "First network JSON")->required();
    v->add_option("b", ver.b, "Second network JSON")->required();
    v->add_option("--t0", ver.t0, "Time step (1-based)")->required();
    v->add_option("--len", ver.len, "Sequence length N");
    v->add_option("--samples", ver.samples)->capture_default_str();
    v->add_option("--seed", ver.seed)->capture_default_str();
    v->add_option("--threshold", ver.threshold)->capture_default_str();
    v->add_option("--domain", ver.domain, "Token entry range lo,hi")->capture_default_str();
    v->add_option("--out", ver.out, "Optional JSON report");

    DemoOptions demo;
    auto* d = app.add_subcommand("approx-demo", "Assemble sequence approximators and measure grid sup-errors");
    d->add_option("--config", demo.config, "Demo config JSON (default: the two-step demo)");
    d->add_option("--out", demo.out, "Output CSV")->required();

    BoundsOptions bo;
    auto* b = app.add_subcommand("bounds", "Covering bound and width/depth schedule arithmetic");
    b->add_option("--W", bo.W)->capture_default_str();
    b->add_option("--L", bo.L)->capture_default_str();
    b->add_option("--K", bo.K)->capture_default_str();
    b->add_option("--n", bo.n)->capture_default_str();
    b->add_option("--delta", bo.delta)->capture_default_str();
    b->add_option("--alpha", bo.alpha)->capture_default_str();
    b->add_option("--beta", bo.beta)->capture_default_str();
    b->add_option("--dx", bo.d_x)->capture_default_str();
    b->add_option("--N", bo.N)->capture_default_str();
    b->add_option("--case", bo.kind, "iid, exp_mixing or alg_mixing")->capture_default_str();
    b->add_option("--r", bo.r, "Algebraic mixing order")->capture_default_str();

    RegressOptions reg;
    auto* r = app.add_subcommand("regress", "Run a convergence-rate experiment");
    r->add_option("--config", reg.config, "Run config JSON")->required();
    r->add_option("--out", reg.out, "Output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kBadInput;
    }

    try {
        if (c->parsed()) return cmd_convert(conv, out);
        if (v->parsed()) return cmd_verify(ver, out);
        if (d->parsed()) return cmd_approx_demo(demo, out);
        if (b->parsed()) return cmd_bounds(bo, out);
        if (r->parsed()) return cmd_regress(reg, out);
    } catch (const DimensionError& e) {
        err << "shape error: " << e.what() << "\n";
        return kShapeError;
    } catch (const OverflowError& e) {
        err << "shape error: " << e.what() << "\n";
        return kShapeError;
    } catch (const TrainingDiverged& e) {
        err << "training failed: " << e.what() << "\n";
        return kTrainingFailed;
    } catch (const nlohmann::json::exception& e) {
        err << "bad input: " << e.what() << "\n";
        return kBadInput;
    } catch (const std::exception& e) {
        err << "bad input: " << e.what() << "\n";
        return kBadInput;
    }
    return kBadInput;
}

}  // namespace rnn_surgery::cli
