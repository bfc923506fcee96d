// critreg: batch front end for the eigenvalue, hole-placement and graph experiments.
#include "critreg/eigenflow.hpp"
#include "critreg/graphlab.hpp"
#include "critreg/holeflow.hpp"
#include "critreg/nodalmap.hpp"
#include "svg.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace critreg;

namespace {

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& key, const std::string& msg) : std::runtime_error(key + ": " + msg) {}
};

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<double> split_numbers(const std::string& key, const std::string& text, char sep) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ConfigError(key, "cannot parse number '" + item + "'");
        }
        if (used != item.size() || !std::isfinite(v)) throw ConfigError(key, "cannot parse number '" + item + "'");
        out.push_back(v);
    }
    return out;
}

Vec2 parse_point(const std::string& key, const std::string& text) {
    const auto v = split_numbers(key, text, ',');
    if (v.size() != 2) throw ConfigError(key, "expected x,y");
    return {v[0], v[1]};
}

std::vector<double> parse_scan(const std::string& key, const std::string& text) {
    const auto v = split_numbers(key, text, ':');
    if (v.size() != 3) throw ConfigError(key, "expected start:stop:step");
    if (!(v[2] > 0.0) || v[1] < v[0]) throw ConfigError(key, "need step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((v[1] - v[0]) / v[2] + 1e-9)) + 1;
    if (count > 100000) throw ConfigError(key, "too many scan points");
    std::vector<double> out;
    for (std::size_t k = 0; k < count; ++k) out.push_back(v[0] + static_cast<double>(k) * v[2]);
    return out;
}

struct ShapeOpts {
    std::string kind = "square";
    std::string vertices;
    double disk_radius = 1.0;

    void add(CLI::App* app, const std::string& default_kind) {
        kind = default_kind;
        app->add_option("--shape", kind, "square | disk | polygon")->capture_default_str();
        app->add_option("--vertices", vertices, "polygon vertices x0,y0;x1,y1;... (counter-clockwise)");
        app->add_option("--disk-radius", disk_radius, "disk radius (centred at the origin)")->capture_default_str();
    }

    Shape build() const {
        try {
            if (kind == "square") return Shape::unit_square();
            if (kind == "disk") {
                if (!(disk_radius > 0.0)) throw ConfigError("disk-radius", "must be positive");
                return Shape::disk({0, 0}, disk_radius);
            }
            if (kind == "polygon") {
                if (vertices.empty()) throw ConfigError("vertices", "required for --shape polygon");
                std::vector<Vec2> pts;
                std::stringstream ss(vertices);
                std::string item;
                while (std::getline(ss, item, ';')) pts.push_back(parse_point("vertices", item));
                return Shape::polygon(std::move(pts));
            }
        } catch (const InvalidInput& e) {
            throw ConfigError(kind == "polygon" ? "vertices" : "shape", e.what());
        }
        throw ConfigError("shape", "unknown shape '" + kind + "'");
    }
};

struct Output {
    std::string dir = ".";
    bool svg = false;
    std::uint64_t seed = 0;
    std::string hash;

    void add(CLI::App* app) {
        app->add_option("--out", dir, "output directory")->capture_default_str();
        app->add_flag("--svg", svg, "also write SVG figures");
        app->add_option("--seed", seed, "random seed")->capture_default_str();
    }

    // Echoes the subcommand's effective configuration and fixes the hash recorded in every CSV.
    void prepare(const CLI::App& sub) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw ConfigError("out", "cannot create directory '" + dir + "': " + ec.message());
        const std::string cfg = sub.config_to_str(true, false);
        std::stringstream in(cfg), kept;
        std::string line;
        while (std::getline(in, line))
            if (line.rfind("out=", 0) != 0 && line.rfind("config=", 0) != 0) kept << line << '\n';
        char buf[24];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(kept.str())));
        hash = buf;
        std::ofstream f(path("config.ini"));
        f << "# config_hash=" << hash << '\n' << '[' << sub.get_name() << "]\n" << kept.str();
    }

    std::string path(const std::string& name) const { return (fs::path(dir) / name).string(); }

    std::ofstream csv(const std::string& name) const {
        std::ofstream f(path(name));
        if (!f) throw std::runtime_error("cannot write " + path(name));
        f << "# config_hash=" << hash << '\n';
        return f;
    }

    void write(const std::string& name, const std::string& text) const {
        std::ofstream f(path(name));
        if (!f) throw std::runtime_error("cannot write " + path(name));
        f << text;
    }
};

void require(bool ok, const std::string& key, const std::string& msg) {
    if (!ok) throw ConfigError(key, msg);
}

std::string fmt(double v, int digits = 10) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

void warn_degenerate(bool degenerate) {
    if (degenerate)
        std::cerr << "warning: mu2 is degenerate to solver tolerance; the eigenvector is one member of its eigenspace\n";
}

void draw_field(svg::Canvas& c, const GridField& f) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : f.values) lo = std::min(lo, v), hi = std::max(hi, v);
    const double h = f.grid->spacing();
    for (std::size_t k = 0; k < f.values.size(); ++k)
        c.rect(f.grid->cell(k).position, h * 1.02, svg::ramp(hi > lo ? (f.values[k] - lo) / (hi - lo) : 0.5));
}

void draw_outline(svg::Canvas& c, const Shape& shape, const std::optional<Hole>& hole = std::nullopt) {
    c.polyline(shape.outline(), "black", 1.5, true);
    if (hole) {
        std::vector<Vec2> pts;
        for (int k = 0; k < 96; ++k) {
            const double t = 2 * M_PI * k / 96;
            pts.push_back(hole->center + hole->radius * Vec2{std::cos(t), std::sin(t)});
        }
        c.polyline(pts, "black", 1.0, true);
    }
}

// ---------------------------------------------------------------------------- eig

struct EigOpts {
    ShapeOpts shape;
    Output out;
    double h = 0.0;
    double r = 0.0;
    std::string x0;
    double dt = 0.0;
    double tol = 1e-8;
    std::size_t max_steps = 400000;
    bool polish = false;
    std::string renorm = "each";
    std::size_t trace_stride = 1;
    bool dump_mask = false;
};

int cmd_eig(const EigOpts& o, const CLI::App& root) {
    const Shape shape = o.shape.build();
    require(o.h > 0.0, "h", "grid spacing must be positive");
    std::optional<Hole> hole;
    if (o.r > 0.0 || !o.x0.empty()) {
        require(o.r > 0.0, "r", "hole radius must be positive when --x0 is given");
        require(!o.x0.empty(), "x0", "hole centre required when --r is given");
        require(o.h < o.r / 3.0, "h", "hole is under-resolved: need h < r/3");
        const Vec2 c = parse_point("x0", o.x0);
        require(shape.signed_distance(c) < -o.r, "x0", "hole must lie strictly inside the domain");
        hole = Hole{c, o.r};
    }
    require(o.dt >= 0.0, "dt", "must be non-negative (0 selects the default)");
    require(o.tol > 0.0, "tol", "must be positive");
    require(o.max_steps > 0, "max-steps", "must be positive");
    require(o.trace_stride > 0, "trace-stride", "must be positive");
    require(o.renorm == "each" || o.renorm == "drift", "renormalize", "expected each | drift");
    Output out = o.out;
    out.prepare(root);

    const auto grid = build_grid(shape, hole, o.h);
    const auto K = assemble_neumann_laplacian(*grid);
    if (o.dump_mask) {
        auto f = out.csv("mask.csv");
        f << "i,j,x,y,fraction\n";
        f.precision(12);
        for (std::size_t k = 0; k < grid->active_count(); ++k) {
            const auto& c = grid->cell(k);
            f << c.i << ',' << c.j << ',' << c.position.x << ',' << c.position.y << ',' << grid->area_fraction(k) << '\n';
        }
    }
    FlowConfig cfg;
    cfg.dt = o.dt;
    require(o.dt <= stability_bound(K, *grid), "dt",
            "exceeds the explicit stability limit " + fmt(stability_bound(K, *grid), 6));
    cfg.tol = o.tol;
    cfg.max_steps = o.max_steps;
    cfg.polish = o.polish;
    cfg.renormalization = o.renorm == "each" ? Renormalization::each_step : Renormalization::drift_triggered;
    cfg.trace_stride = o.trace_stride;
    const auto flow = run_flow(K, random_initial_field(grid, out.seed), cfg);
    const auto oracle = second_eigenpair_oracle(K, grid);

    {
        auto f = out.csv("eigenpair.csv");
        f << "x,y,psi\n";
        f.precision(12);
        for (std::size_t k = 0; k < grid->active_count(); ++k)
            f << grid->cell(k).position.x << ',' << grid->cell(k).position.y << ',' << flow.pair.psi.values[k] << '\n';
    }
    {
        auto f = out.csv("trace.csv");
        flow.trace.write_csv(f);
    }
    if (out.svg) {
        svg::Canvas c(svg::padded(shape.bounding_box()));
        draw_field(c, flow.pair.psi);
        draw_outline(c, shape, hole);
        out.write("eigenpair.svg", c.str());
    }
    const bool degenerate = oracle.pair.degenerate;
    std::cout << "mu2=" << fmt(flow.pair.mu) << " gap=" << fmt(oracle.pair.gap(), 6)
              << " degenerate=" << (degenerate ? "true" : "false") << '\n';
    std::cout << "steps=" << flow.steps << " converged=" << (flow.converged ? "true" : "false")
              << " polished=" << (flow.trace.polished ? "true" : "false") << " oracle_mu2=" << fmt(oracle.pair.mu)
              << " cells=" << grid->active_count() << '\n';
    warn_degenerate(degenerate);
    if (!flow.converged) {
        std::cerr << "error: flow did not reach tol " << o.tol << " within " << o.max_steps << " steps\n";
        return 2;
    }
    return 0;
}

// ------------------------------------------------------------------ hole-sweep

struct SweepOpts {
    ShapeOpts shape;
    Output out;
    double h = 1.0 / 64;
    double r = 0.1;
    std::string scan;
    std::string origin;
    std::string direction = "1,0";
    double heatmap = 0.0;
    unsigned threads = 0;
};

int cmd_hole_sweep(const SweepOpts& o, const CLI::App& root) {
    const Shape shape = o.shape.build();
    require(o.h > 0.0, "h", "grid spacing must be positive");
    require(o.r > 0.0, "r", "hole radius must be positive");
    require(o.h < o.r / 3.0, "h", "hole is under-resolved: need h < r/3");
    require(o.scan.empty() != (o.heatmap <= 0.0), "scan", "give exactly one of --scan or --heatmap");
    const auto box = shape.bounding_box();
    std::vector<Vec2> positions;
    if (!o.scan.empty()) {
        const Vec2 base = o.origin.empty() ? 0.5 * (box.lo + box.hi) : parse_point("origin", o.origin);
        Vec2 dir = parse_point("direction", o.direction);
        require(norm(dir) > 0.0, "direction", "must be nonzero");
        dir = (1.0 / norm(dir)) * dir;
        for (double d : parse_scan("scan", o.scan)) positions.push_back(base + d * dir);
    } else {
        const AdmissibleSet adm(shape, o.r);
        const auto nx = static_cast<int>(std::floor((box.hi.x - box.lo.x) / o.heatmap));
        const auto ny = static_cast<int>(std::floor((box.hi.y - box.lo.y) / o.heatmap));
        require(nx > 0 && ny > 0 && nx * ny <= 200000, "heatmap", "spacing gives an empty or oversized lattice");
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) {
                const Vec2 p{box.lo.x + i * o.heatmap, box.lo.y + j * o.heatmap};
                if (adm.contains(p) && shape.signed_distance(p) < -o.r - o.h) positions.push_back(p);
            }
        require(!positions.empty(), "heatmap", "no admissible positions");
    }
    Output out = o.out;
    out.prepare(root);

    const auto entries = mu2_vs_position_sweep(shape, o.r, o.h, positions, o.threads);
    {
        auto f = out.csv("sweep.csv");
        write_sweep_csv(f, entries);
    }
    std::size_t failed = 0, degenerate = 0;
    for (const auto& e : entries) {
        if (!e.error.empty()) {
            ++failed;
            std::cerr << "position (" << e.x.x << "," << e.x.y << "): " << e.error << '\n';
        }
        degenerate += e.degenerate;
    }
    if (out.svg) {
        svg::Canvas c(svg::padded(box));
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& e : entries)
            if (std::isfinite(e.mu2)) lo = std::min(lo, e.mu2), hi = std::max(hi, e.mu2);
        const double cell = o.heatmap > 0.0 ? o.heatmap : 0.6 * o.r;
        for (const auto& e : entries) c.rect(e.x, cell, svg::ramp(hi > lo ? (e.mu2 - lo) / (hi - lo) : 0.5));
        draw_outline(c, shape);
        out.write("sweep.svg", c.str());
    }
    std::cout << "positions=" << entries.size() << " failed=" << failed << " degenerate=" << degenerate << '\n';
    return failed == entries.size() ? 2 : 0;
}

// ------------------------------------------------------------------- hole-flow

struct HoleFlowOpts {
    ShapeOpts shape;
    Output out;
    HoleFlowConfig cfg;
    std::string x0;
};

int cmd_hole_flow(HoleFlowOpts o, const CLI::App& root) {
    const Shape shape = o.shape.build();
    require(!o.x0.empty(), "x0", "initial hole centre is required");
    const Vec2 x0 = parse_point("x0", o.x0);
    try {
        o.cfg.validate();
    } catch (const InvalidInput& e) {
        const std::string msg = e.what();
        throw ConfigError(msg.substr(0, msg.find(':')), msg.substr(msg.find(':') + 2));
    }
    require(AdmissibleSet(shape, o.cfg.r).contains(x0), "x0", "hole centre must be farther than r from the boundary");
    Output out = o.out;
    out.prepare(root);
    o.cfg.seed = out.seed;

    const auto traj = run_hole_flow(shape, x0, o.cfg);
    {
        auto f = out.csv("trajectory.csv");
        traj.write_csv(f);
    }
    {
        auto f = out.csv("trajectory_diagnostics.csv");
        f << "step,a,b,norm_drift,mean_drift\n";
        f.precision(6);
        for (const auto& r : traj.records)
            f << r.step << ',' << r.a << ',' << r.b << ',' << r.norm_drift << ',' << r.mean_drift << '\n';
    }
    const auto& last = traj.records.back();
    if (out.svg) {
        svg::Canvas c(svg::padded(shape.bounding_box()));
        draw_field(c, traj.final_psi);
        draw_outline(c, shape, Hole{last.x, o.cfg.r});
        std::vector<Vec2> path;
        for (const auto& r : traj.records) path.push_back(r.x);
        c.polyline(path, "black", 2.0);
        c.circle(path.front(), 4, "black");
        c.circle(path.back(), 4, "white", "black");
        out.write("trajectory.svg", c.str());
    }
    bool degenerate = false;
    for (const auto& r : traj.records) degenerate = degenerate || r.degenerate;
    std::cout << "x*=" << fmt(last.x.x, 8) << ',' << fmt(last.x.y, 8) << " mu2*=" << fmt(last.mu2)
              << " v_norm=" << fmt(last.v_norm, 6) << '\n';
    std::cout << "steps=" << traj.records.size() << " converged=" << (traj.converged ? "true" : "false")
              << " t=" << fmt(last.t, 8) << '\n';
    if (degenerate) std::cerr << "warning: mu2 was degenerate at some step; the flow used the returned eigenvector\n";
    if (!traj.converged) {
        std::cerr << "error: hole flow did not reach v_tol " << o.cfg.v_tol << " in " << o.cfg.max_outer << " steps\n";
        return 2;
    }
    return 0;
}

// ------------------------------------------------------------------- nodal-map

struct NodalOpts {
    ShapeOpts shape;
    Output out;
    double h = 1.0 / 64;
};

int cmd_nodal_map(const NodalOpts& o, const CLI::App& root) {
    const Shape shape = o.shape.build();
    require(o.h > 0.0, "h", "grid spacing must be positive");
    Output out = o.out;
    out.prepare(root);

    const auto grid = build_grid(shape, std::nullopt, o.h);
    const auto oracle = second_eigenpair_oracle(assemble_neumann_laplacian(*grid), grid);
    const auto pair = x_aligned_branch(oracle);
    const auto rep = nodal_report(pair);
    {
        auto f = out.csv("f.csv");
        write_objective_csv(f, rep.objective);
    }
    {
        auto f = out.csv("nodal.csv");
        write_nodal_csv(f, rep.nodal);
    }
    {
        auto f = out.csv("minima.csv");
        write_minima_csv(f, rep.minima);
    }
    if (out.svg) {
        svg::Canvas c(svg::padded(shape.bounding_box()));
        draw_field(c, rep.objective.f);
        draw_outline(c, shape);
        for (const auto& line : rep.nodal.polylines) c.polyline(line, "black", 2.0);
        for (const auto& m : rep.minima) c.circle(m.x, 2.5, "yellow", "black");
        out.write("nodal.svg", c.str());
    }
    double worst = 0.0;
    for (const auto& m : rep.minima) worst = std::max(worst, m.distance_to_nodal);
    std::cout << "mu2=" << fmt(pair.mu) << " sign_regions=" << rep.nodal.sign_regions
              << " minima=" << rep.minima.size() << " max_distance_to_nodal=" << fmt(worst, 6) << '\n';
    warn_degenerate(pair.degenerate);
    return 0;
}

// ----------------------------------------------------------------- graph-sweep

struct GraphOpts {
    Output out;
    std::string model = "er";
    std::size_t n = 50;
    double p = 0.15;
    double radius = 0.0;
    double quantile = 0.2;
    std::string edges;
    unsigned threads = 0;
};

int cmd_graph_sweep(const GraphOpts& o, const CLI::App& root) {
    require(o.model == "er" || o.model == "geometric", "model", "expected er | geometric");
    require(o.n >= 3, "n", "need at least 3 nodes");
    require(o.quantile > 0.0 && o.quantile <= 1.0, "quantile", "must lie in (0, 1]");
    if (o.edges.empty()) {
        if (o.model == "er") require(o.p > 0.0 && o.p <= 1.0, "p", "edge probability must lie in (0, 1]");
        else require(o.radius > 0.0, "radius", "linking radius must be positive");
    }
    Output out = o.out;
    out.prepare(root);

    SimpleGraph g;
    if (!o.edges.empty()) {
        std::ifstream in(o.edges);
        if (!in) throw ConfigError("edges", "cannot open '" + o.edges + "'");
        g = read_edge_list(in);
    } else {
        const auto model = o.model == "er" ? GraphModel::erdos_renyi(o.p) : GraphModel::geometric(o.radius);
        g = generate_graph(model, o.n, out.seed);
        std::ofstream f(out.path("graph.txt"));
        write_edge_list(f, g);
    }
    const auto sweep = removal_sweep(g, o.threads);
    const auto rep = heuristic_agreement(sweep, o.quantile);
    {
        auto f = out.csv("removal.csv");
        write_removal_csv(f, sweep);
    }
    if (out.svg) {
        double fmax = 0, lmax = 0;
        for (const auto& r : sweep.rows) fmax = std::max(fmax, r.fiedler_abs), lmax = std::max(lmax, r.lambda2_residual);
        fmax = fmax > 0 ? fmax : 1;
        lmax = lmax > 0 ? lmax : 1;
        svg::Canvas c(svg::padded({{0, 0}, {1, 1}}, 0.1), 480);
        c.polyline({{0, 1}, {0, 0}, {1, 0}}, "black", 1.0);
        for (const auto& r : sweep.rows)
            c.circle({r.fiedler_abs / fmax, r.lambda2_residual / lmax}, 3.5, r.node == rep.argmin ? "red" : "steelblue");
        c.text({0.3, -0.07}, "|v_i| (scaled)");
        c.text({-0.09, 1.04}, "lambda2(G - i) (scaled)");
        out.write("removal.svg", c.str());
    }
    std::cout << "n=" << g.n << " edges=" << g.edges.size() << " lambda2=" << fmt(sweep.lambda2)
              << " argmin=" << rep.argmin << " argmin_rank=" << rep.argmin_rank << " rank_limit=" << rep.rank_limit
              << " agreement=" << (rep.agreement ? "true" : "false") << " flat=" << (rep.flat ? "true" : "false")
              << " spearman=" << fmt(rep.spearman, 4) << '\n';
    if (sweep.degenerate) std::cerr << "warning: lambda2 of the graph is degenerate; |v_i| depends on the solver's choice\n";
    return 0;
}

// ----------------------------------------------------------------- consistency

struct ConsistencyOpts {
    Output out;
    std::vector<std::size_t> sizes{100, 400, 1600};
    double radius = 0.0;
    double h = 1.0 / 64;
};

int cmd_consistency(const ConsistencyOpts& o, const CLI::App& root) {
    require(!o.sizes.empty(), "sizes", "need at least one graph size");
    for (auto n : o.sizes) require(n >= 20, "sizes", "graphs need at least 20 nodes");
    require(o.radius >= 0.0, "radius", "must be non-negative (0 selects average degree 15)");
    require(o.h > 0.0 && o.h < 0.25, "h", "grid spacing must lie in (0, 0.25)");
    Output out = o.out;
    out.prepare(root);

    auto f = out.csv("consistency.csv");
    f << "n,radius,average_degree,lambda2,mismatch,control_mismatch\n";
    f.precision(10);
    for (auto n : o.sizes) {
        const auto r = continuum_consistency(n, o.radius, o.h, out.seed);
        f << r.n << ',' << r.radius << ',' << r.average_degree << ',' << r.lambda2 << ',' << r.mismatch << ','
          << r.control_mismatch << '\n';
        std::cout << "n=" << r.n << " radius=" << fmt(r.radius, 6) << " degree=" << fmt(r.average_degree, 4)
                  << " mismatch=" << fmt(r.mismatch, 6) << " control=" << fmt(r.control_mismatch, 6) << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Second Neumann eigenvalue experiments: eigenflow, hole placement, nodal maps, graphs"};
    app.set_config("--config", "", "key=value config file; command-line flags take precedence");
    app.require_subcommand(1);
    app.fallthrough();
    app.set_help_flag("--help", "Print this help message and exit"); // -h would clash with --h

    EigOpts eig;
    auto* c_eig = app.add_subcommand("eig", "second eigenpair by the projected gradient flow");
    eig.shape.add(c_eig, "square");
    eig.out.add(c_eig);
    c_eig->add_option("--h", eig.h, "grid spacing")->required();
    c_eig->add_option("--r", eig.r, "optional hole radius");
    c_eig->add_option("--x0", eig.x0, "optional hole centre x,y");
    c_eig->add_option("--dt", eig.dt, "time step (0: half the stability limit)")->capture_default_str();
    c_eig->add_option("--tol", eig.tol, "gradient-norm tolerance")->capture_default_str();
    c_eig->add_option("--max-steps", eig.max_steps)->capture_default_str();
    c_eig->add_flag("--polish", eig.polish, "finish on the oracle eigenspace once J stagnates");
    c_eig->add_option("--renormalize", eig.renorm, "each | drift")->capture_default_str();
    c_eig->add_option("--trace-stride", eig.trace_stride)->capture_default_str();
    c_eig->add_flag("--dump-mask", eig.dump_mask, "write mask.csv with the active cells");

    SweepOpts sw;
    auto* c_sw = app.add_subcommand("hole-sweep", "mu2 of the domain minus a ball, over hole positions");
    sw.shape.add(c_sw, "disk");
    sw.out.add(c_sw);
    c_sw->add_option("--h", sw.h, "grid spacing")->capture_default_str();
    c_sw->add_option("--r", sw.r, "hole radius")->capture_default_str();
    c_sw->add_option("--scan", sw.scan, "start:stop:step distances along --direction from --origin");
    c_sw->add_option("--origin", sw.origin, "scan origin x,y (default: bounding-box centre)");
    c_sw->add_option("--direction", sw.direction, "scan direction x,y")->capture_default_str();
    c_sw->add_option("--heatmap", sw.heatmap, "lattice spacing for a heatmap over admissible centres");
    c_sw->add_option("--threads", sw.threads, "worker threads (0: all cores)")->capture_default_str();

    HoleFlowOpts hf;
    auto* c_hf = app.add_subcommand("hole-flow", "gradient descent of mu2 in the hole centre");
    hf.shape.add(c_hf, "disk");
    hf.out.add(c_hf);
    c_hf->add_option("--x0", hf.x0, "initial hole centre x,y");
    c_hf->add_option("--r", hf.cfg.r, "hole radius")->capture_default_str();
    c_hf->add_option("--h", hf.cfg.h, "grid spacing")->capture_default_str();
    c_hf->add_option("--quadrature", hf.cfg.quadrature, "nodes on the hole circle")->capture_default_str();
    c_hf->add_option("--inner-tol", hf.cfg.inner_tol)->capture_default_str();
    c_hf->add_option("--inner-max-steps", hf.cfg.inner_max_steps)->capture_default_str();
    c_hf->add_option("--v-tol", hf.cfg.v_tol)->capture_default_str();
    c_hf->add_option("--max-outer", hf.cfg.max_outer)->capture_default_str();
    c_hf->add_option("--step-fraction", hf.cfg.step_fraction, "outer step cap as a fraction of r")->capture_default_str();
    c_hf->add_option("--v-floor", hf.cfg.v_floor)->capture_default_str();

    NodalOpts nm;
    auto* c_nm = app.add_subcommand("nodal-map", "small-hole objective f, nodal set and minima");
    nm.shape.add(c_nm, "square");
    nm.out.add(c_nm);
    c_nm->add_option("--h", nm.h, "grid spacing")->capture_default_str();

    GraphOpts gs;
    auto* c_gs = app.add_subcommand("graph-sweep", "exhaustive node-removal sweep of lambda2");
    gs.out.add(c_gs);
    c_gs->add_option("--model", gs.model, "er | geometric")->capture_default_str();
    c_gs->add_option("--n", gs.n)->capture_default_str();
    c_gs->add_option("--p", gs.p, "edge probability (er)")->capture_default_str();
    c_gs->add_option("--radius", gs.radius, "linking radius (geometric)");
    c_gs->add_option("--quantile", gs.quantile)->capture_default_str();
    c_gs->add_option("--edges", gs.edges, "read the graph from an edge-list file instead");
    c_gs->add_option("--threads", gs.threads)->capture_default_str();

    ConsistencyOpts cs;
    auto* c_cs = app.add_subcommand("consistency", "geometric-graph Fiedler vector vs grid eigenfunction");
    cs.out.add(c_cs);
    c_cs->add_option("--sizes", cs.sizes, "graph sizes")->delimiter(',')->capture_default_str();
    c_cs->add_option("--radius", cs.radius, "linking radius (0: average degree 15)")->capture_default_str();
    c_cs->add_option("--h", cs.h, "grid spacing")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (c_eig->parsed()) return cmd_eig(eig, *c_eig);
        if (c_sw->parsed()) return cmd_hole_sweep(sw, *c_sw);
        if (c_hf->parsed()) return cmd_hole_flow(hf, *c_hf);
        if (c_nm->parsed()) return cmd_nodal_map(nm, *c_nm);
        if (c_gs->parsed()) return cmd_graph_sweep(gs, *c_gs);
        if (c_cs->parsed()) return cmd_consistency(cs, *c_cs);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
