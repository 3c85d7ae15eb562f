// liouville: construct, verify, and integrate (b-)integrable systems.
//
// Subcommands: validate, flow, actions, lift, catalog.
// Exit codes: 0 pass, 1 check failed, 2 usage or parse error.

#include <CLI11.hpp>

#include "liouville/actionangle.hpp"
#include "liouville/catalog.hpp"
#include "liouville/flow.hpp"
#include "liouville/lift.hpp"
#include "liouville/sysfile.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace liouville;

std::uint64_t defaultSeed() {
    if (const char* env = std::getenv("LIOUVILLE_SEED")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0') return v;
        throw CLI::ValidationError("LIOUVILLE_SEED must be an unsigned integer");
    }
    return 42;
}

std::vector<double> parseCsvPoint(const std::string& s, int expected, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        double v = std::strtod(item.c_str(), &end);
        if (end == item.c_str())
            throw CLI::ValidationError(flag + ": '" + item + "' is not a number");
        out.push_back(v);
    }
    if (static_cast<int>(out.size()) != expected)
        throw CLI::ValidationError(flag + ": expected " + std::to_string(expected) +
                                   " comma-separated values, got " + std::to_string(out.size()));
    return out;
}

void writeOut(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
    f << content;
}

std::string trajectoryCsv(const Trajectory& traj, const PhaseChart& chart) {
    std::ostringstream out;
    out << "t";
    for (const auto& name : chart.coordNames()) out << "," << name;
    out << ",drift\n";
    char buf[40];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
    };
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        emit(traj.times[i]);
        for (double x : traj.states[i]) {
            out << ",";
            emit(x);
        }
        out << ",";
        emit(traj.drift[i]);
        out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// lift argument grammars

PhaseChart parseBaseSpec(const std::string& spec) {
    // factors separated by 'x': S1, Tk (k angles), Rk (k reals)
    std::vector<std::pair<bool, int>> factors;  // (angle?, count)
    std::string cur;
    auto flush = [&]() {
        if (cur.empty()) throw CLI::ValidationError("--base: empty factor");
        char head = cur[0];
        int count = 1;
        if (cur.size() > 1) {
            char* end = nullptr;
            count = static_cast<int>(std::strtol(cur.c_str() + 1, &end, 10));
            if (*end != '\0' || count < 1)
                throw CLI::ValidationError("--base: bad factor '" + cur + "'");
        }
        if (head == 'S') {
            if (count != 1) throw CLI::ValidationError("--base: only S1 circles are supported");
            factors.push_back({true, 1});
        } else if (head == 'T') {
            factors.push_back({true, count});
        } else if (head == 'R') {
            factors.push_back({false, count});
        } else {
            throw CLI::ValidationError("--base: factor '" + cur + "' must start with S, T or R");
        }
        cur.clear();
    };
    for (char ch : spec) {
        if (ch == 'x') {
            flush();
        } else if (!std::isspace(static_cast<unsigned char>(ch))) {
            cur += ch;
        }
    }
    flush();

    int nAngles = 0, nReals = 0;
    for (auto [angle, count] : factors) (angle ? nAngles : nReals) += count;
    std::vector<PhaseChart::BaseCoord> base;
    std::vector<std::string> fibers;
    int ai = 0, ri = 0;
    for (auto [angle, count] : factors)
        for (int i = 0; i < count; ++i) {
            if (angle) {
                std::string suffix = nAngles == 1 ? "" : std::to_string(++ai);
                base.push_back({"theta" + suffix, true});
                fibers.push_back("a" + suffix);
            } else {
                std::string suffix = nReals == 1 ? "" : std::to_string(++ri);
                base.push_back({"x" + suffix, false});
                fibers.push_back("y" + suffix);
            }
        }
    return PhaseChart::make(std::move(base), std::move(fibers));
}

ActionSpec parseActionSpec(const std::string& spec) {
    ActionSpec action;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ';')) {
        auto open = item.find('(');
        if (open == std::string::npos || item.back() != ')')
            throw CLI::ValidationError("--action: generator '" + item + "' must be name(args)");
        std::string name = item.substr(0, open);
        std::string inner = item.substr(open + 1, item.size() - open - 2);
        std::vector<std::string> args;
        std::stringstream as(inner);
        std::string a;
        while (std::getline(as, a, ',')) {
            std::string t;
            for (char ch : a)
                if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
            args.push_back(t);
        }
        auto expectArgs = [&](std::size_t k) {
            if (args.size() != k)
                throw CLI::ValidationError("--action: " + name + " takes " + std::to_string(k) +
                                           " coordinate(s)");
        };
        if (name == "rot" || name == "trans") {
            expectArgs(1);
            action.generators.push_back(Generator::translation(args[0]));
        } else if (name == "rotation") {
            expectArgs(2);
            action.generators.push_back(Generator::rotation(args[0], args[1]));
        } else if (name == "scale") {
            expectArgs(1);
            action.generators.push_back(Generator::scaling(args[0]));
        } else if (name == "radial") {
            expectArgs(2);
            action.generators.push_back(Generator::radialScaling(args[0], args[1]));
        } else {
            throw CLI::ValidationError("--action: unknown generator '" + name +
                                       "' (use rot, trans, rotation, scale, radial)");
        }
    }
    if (action.generators.empty()) throw CLI::ValidationError("--action: no generators given");
    return action;
}

LiftKind parseKindSpec(const std::string& spec, const ActionSpec& action) {
    if (spec == "canonical") return LiftKind::symplectic();
    if (spec.rfind("twisted_b", 0) == 0) {
        double c = 1.0;
        auto colon = spec.find(':');
        if (colon != std::string::npos) {
            std::string rest = spec.substr(colon + 1);
            if (rest.rfind("c=", 0) == 0) rest = rest.substr(2);
            char* end = nullptr;
            c = std::strtod(rest.c_str(), &end);
            if (end == rest.c_str() || *end != '\0' || !(c > 0))
                throw CLI::ValidationError("--kind: twisted_b needs a positive c");
        }
        if (action.generators.empty() ||
            action.generators.front().type != Generator::Type::Translation)
            throw CLI::ValidationError(
                "--kind twisted_b: the first generator must be the rotation of the "
                "distinguished circle");
        return LiftKind::twistedB(c, action.generators.front().a);
    }
    if (spec.rfind("canonical_b:", 0) == 0)
        return LiftKind::canonicalB(spec.substr(std::string("canonical_b:").size()));
    throw CLI::ValidationError("--kind: expected canonical, twisted_b[:c=..] or canonical_b:<coord>");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"construct, verify and integrate (b-)integrable Hamiltonian systems"};
    app.require_subcommand(1);

    // validate -----------------------------------------------------------
    auto* validate = app.add_subcommand("validate", "verify a system definition file");
    std::string vFile;
    std::optional<int> vSamples;
    std::optional<std::uint64_t> vSeed;
    std::optional<double> vBox;
    validate->add_option("file", vFile, "system definition file")->required();
    validate->add_option("--samples", vSamples, "sample count override");
    validate->add_option("--seed", vSeed, "RNG seed override");
    validate->add_option("--box", vBox, "sampling box half-width override");

    // flow ----------------------------------------------------------------
    auto* flow = app.add_subcommand("flow", "integrate one Hamiltonian flow, emit CSV");
    std::string fFile, fIntegral, fX0, fMethod = "implicit_midpoint", fOut;
    double fDt = 1e-2, fT = 10.0;
    int fStride = 1;
    flow->add_option("file", fFile, "system definition file")->required();
    flow->add_option("--integral", fIntegral, "integral name to flow")->required();
    flow->add_option("--x0", fX0, "initial point, comma-separated")->required();
    flow->add_option("--dt", fDt, "time step");
    flow->add_option("--T", fT, "total time");
    flow->add_option("--method", fMethod, "rk4 | implicit_midpoint");
    flow->add_option("--stride", fStride, "keep every n-th state");
    flow->add_option("-o,--output", fOut, "output file (default: standard output)");

    // actions ---------------------------------------------------------------
    auto* actions = app.add_subcommand("actions", "reconstruct action coordinates at a point");
    std::string aFile, aPoint;
    bool aRaw = false;
    actions->add_option("file", aFile, "system definition file")->required();
    actions->add_option("--point", aPoint, "torus point, comma-separated")->required();
    actions->add_flag("--raw-signs", aRaw, "keep signed actions (no orientation flip)");

    // lift --------------------------------------------------------------------
    auto* lift = app.add_subcommand("lift", "build a lifted system, emit a system file");
    std::string lBase, lAction, lKind = "canonical", lOut;
    lift->add_option("--base", lBase, "base manifold, e.g. S1xR2, T2, R1xT2")->required();
    lift->add_option("--action", lAction,
                     "generators, e.g. 'rot(theta);rotation(x1,x2)' "
                     "(rot/trans/rotation/scale/radial)")
        ->required();
    lift->add_option("--kind", lKind, "canonical | twisted_b[:c=..] | canonical_b:<coord>");
    lift->add_option("-o,--output", lOut, "output file (default: standard output)");

    // catalog -----------------------------------------------------------------
    auto* catalog = app.add_subcommand("catalog", "list built-in systems or export one");
    std::string cExport, cOut;
    auto* catalogList = catalog->add_subcommand("list", "list catalog ids");
    auto* catalogExport = catalog->add_subcommand("export", "write a catalog system file");
    catalogExport->add_option("id", cExport, "catalog id, e.g. tw_model(2,1)")->required();
    catalogExport->add_option("-o,--output", cOut, "output file (default: standard output)");
    catalog->require_subcommand(0, 1);
    (void)catalogList;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*validate) {
            SystemFile sf = loadSystemFile(vFile);
            if (!sf.hasVerifySection) sf.verify.seed = defaultSeed();
            if (vSamples) sf.verify.samples = *vSamples;
            if (vSeed) sf.verify.seed = *vSeed;
            if (vBox) sf.verify.box = *vBox;
            VerificationReport rep = verify(sf.system, sf.verify);
            std::cout << reportToJson(rep, sf.system) << "\n";
            return rep.pass() ? 0 : 1;
        }

        if (*flow) {
            SystemFile sf = loadSystemFile(fFile);
            int idx = -1;
            for (std::size_t i = 0; i < sf.system.integralNames.size(); ++i)
                if (sf.system.integralNames[i] == fIntegral) idx = static_cast<int>(i);
            if (idx < 0) {
                std::cerr << "no integral named '" << fIntegral << "' (have:";
                for (const auto& n : sf.system.integralNames) std::cerr << " " << n;
                std::cerr << ")\n";
                return 2;
            }
            auto x0 = parseCsvPoint(fX0, sf.system.dim(), "--x0");
            IntegrateOptions opt;
            if (fMethod == "rk4")
                opt.method = Method::Rk4;
            else if (fMethod == "implicit_midpoint")
                opt.method = Method::ImplicitMidpoint;
            else
                throw CLI::ValidationError("--method must be rk4 or implicit_midpoint");
            opt.stride = fStride;
            Trajectory traj = integrate(sf.system, idx, x0, fDt, fT, opt);
            writeOut(fOut, trajectoryCsv(traj, sf.system.chart()));
            return 0;
        }

        if (*actions) {
            SystemFile sf = loadSystemFile(aFile);
            auto m = parseCsvPoint(aPoint, sf.system.dim(), "--point");
            PeriodLattice lattice = findPeriodLattice(sf.system, m);
            ActionOptions opt;
            opt.normalizeOrientation = !aRaw;
            ActionReport rep = actionIntegrals(sf.system, lattice, m, opt);
            std::cout << actionReportToJson(rep, lattice) << "\n";
            return 0;
        }

        if (*lift) {
            PhaseChart chart = parseBaseSpec(lBase);
            ActionSpec action = parseActionSpec(lAction);
            LiftKind kind = parseKindSpec(lKind, action);
            LiftResult res = buildLift(chart, action, kind);
            for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
            writeOut(lOut, serializeSystemFile(res.system));
            return 0;
        }

        if (*catalog) {
            if (cExport.empty()) {
                for (const auto& [id, note] : catalogIndex())
                    std::cout << id << "\t" << note << "\n";
                return 0;
            }
            CatalogEntry entry = catalogGet(cExport);
            for (const auto& w : entry.warnings) std::cerr << "warning: " << w << "\n";
            writeOut(cOut, serializeSystemFile(entry.system, &entry.expected));
            return 0;
        }
    } catch (const SysFileError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const CatalogError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        // domain failures: non-commuting generators, no return found, ...
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 2;
}
