#include "liouville/sysfile.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace liouville {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> splitList(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
    return out;
}

struct Entry {
    std::string value;
    int line = 0;
};

struct Section {
    std::vector<std::pair<std::string, Entry>> entries;  // in file order
    int line = 0;

    const Entry* find(const std::string& key) const {
        for (const auto& [k, e] : entries)
            if (k == key) return &e;
        return nullptr;
    }
};

double parseReal(const std::string& origin, const Entry& e, const std::string& key) {
    char* end = nullptr;
    double v = std::strtod(e.value.c_str(), &end);
    if (end == e.value.c_str() || *end != '\0')
        throw SysFileError(origin, e.line, "value of '" + key + "' is not a number");
    return v;
}

long parseInt(const std::string& origin, const Entry& e, const std::string& key) {
    char* end = nullptr;
    long v = std::strtol(e.value.c_str(), &end, 10);
    if (end == e.value.c_str() || *end != '\0')
        throw SysFileError(origin, e.line, "value of '" + key + "' is not an integer");
    return v;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

SystemFile parseSystemFile(const std::string& text, const std::string& origin) {
    std::map<std::string, Section> sections;
    {
        std::istringstream in(text);
        std::string raw;
        std::string current;
        int lineNo = 0;
        while (std::getline(in, raw)) {
            ++lineNo;
            std::string line = raw;
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw SysFileError(origin, lineNo, "unterminated section header");
                current = trim(line.substr(1, line.size() - 2));
                if (current.empty()) throw SysFileError(origin, lineNo, "empty section name");
                sections[current].line = lineNo;
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw SysFileError(origin, lineNo, "expected 'key = value'");
            if (current.empty())
                throw SysFileError(origin, lineNo, "entry outside any section");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw SysFileError(origin, lineNo, "empty key");
            sections[current].entries.push_back({key, {value, lineNo}});
        }
    }

    auto sysIt = sections.find("system");
    if (sysIt == sections.end()) throw SysFileError(origin, 1, "missing [system] section");
    const Section& sys = sysIt->second;

    const Entry* coordsE = sys.find("coordinates");
    if (!coordsE) throw SysFileError(origin, sys.line, "missing 'coordinates'");
    std::vector<PhaseChart::BaseCoord> base;
    for (const auto& item : splitList(coordsE->value)) {
        auto colon = item.find(':');
        std::string name = trim(colon == std::string::npos ? item : item.substr(0, colon));
        std::string tag = colon == std::string::npos ? "real" : trim(item.substr(colon + 1));
        if (tag != "angle" && tag != "real")
            throw SysFileError(origin, coordsE->line,
                               "coordinate tag must be 'angle' or 'real', got '" + tag + "'");
        base.push_back({name, tag == "angle"});
    }
    if (base.empty()) throw SysFileError(origin, coordsE->line, "empty coordinate list");

    PhaseChart chart;
    try {
        if (const Entry* fibersE = sys.find("fibers"))
            chart = PhaseChart::make(base, splitList(fibersE->value));
        else
            chart = PhaseChart::make(base);
    } catch (const ChartError& err) {
        throw SysFileError(origin, sys.line, err.what());
    }
    if (const Entry* trE = sys.find("transverse"))
        for (const auto& name : splitList(trE->value)) chart.transverse.push_back(name);

    const Entry* structE = sys.find("structure");
    if (!structE) throw SysFileError(origin, sys.line, "missing 'structure'");

    SystemFile out;
    const std::string& kind = structE->value;
    try {
        if (kind == "canonical") {
            out.system.structure = PoissonStructure::canonical(chart);
        } else if (kind == "twisted_b") {
            const Entry* cE = sys.find("c");
            const Entry* sE = sys.find("singular");
            if (!sE) throw SysFileError(origin, structE->line, "twisted_b needs 'singular'");
            double c = cE ? parseReal(origin, *cE, "c") : 1.0;
            out.system.structure = PoissonStructure::twistedB(chart, c, sE->value);
        } else if (kind == "canonical_b") {
            const Entry* sE = sys.find("singular");
            if (!sE) throw SysFileError(origin, structE->line, "canonical_b needs 'singular'");
            out.system.structure = PoissonStructure::canonicalB(chart, sE->value);
        } else if (kind == "custom") {
            const int dim = chart.dim();
            std::vector<std::vector<Expr>> upper(static_cast<std::size_t>(dim),
                                                 std::vector<Expr>(static_cast<std::size_t>(dim)));
            for (const auto& [key, entry] : sys.entries) {
                if (key.rfind("pi_", 0) != 0) continue;
                int i = 0, j = 0;
                if (std::sscanf(key.c_str(), "pi_%d_%d", &i, &j) != 2 || i < 1 || j <= i || j > dim)
                    throw SysFileError(origin, entry.line,
                                       "custom entry key must be pi_i_j with 1 <= i < j <= " +
                                           std::to_string(dim));
                try {
                    upper[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] =
                        parse(entry.value, chart.coordNames());
                } catch (const ParseError& err) {
                    throw SysFileError(origin, entry.line, err.what());
                }
            }
            out.system.structure = PoissonStructure::custom(chart, std::move(upper));
        } else {
            throw SysFileError(origin, structE->line, "unknown structure kind '" + kind + "'");
        }
    } catch (const ChartError& err) {
        throw SysFileError(origin, structE->line, err.what());
    }

    if (const Entry* nameE = sys.find("name"))
        out.system.name = nameE->value;
    else
        out.system.name = "system";

    auto intIt = sections.find("integrals");
    if (intIt == sections.end()) throw SysFileError(origin, 1, "missing [integrals] section");
    for (const auto& [key, entry] : intIt->second.entries) {
        try {
            Expr e = parse(entry.value, chart.coordNames());
            out.system.integrals.push_back(promote(e, chart.coordNames()));
            out.system.integralNames.push_back(key);
        } catch (const ParseError& err) {
            throw SysFileError(origin, entry.line, err.what());
        }
    }
    if (out.system.integrals.empty())
        throw SysFileError(origin, intIt->second.line, "no integrals given");

    auto verIt = sections.find("verify");
    if (verIt != sections.end()) {
        out.hasVerifySection = true;
        const Section& v = verIt->second;
        for (const auto& [key, entry] : v.entries) {
            if (key == "samples")
                out.verify.samples = static_cast<int>(parseInt(origin, entry, key));
            else if (key == "seed")
                out.verify.seed = static_cast<std::uint64_t>(parseInt(origin, entry, key));
            else if (key == "box")
                out.verify.box = parseReal(origin, entry, key);
            else if (key == "tol_jacobi")
                out.verify.tolJacobi = parseReal(origin, entry, key);
            else if (key == "tol_involutivity")
                out.verify.tolInvolutivity = parseReal(origin, entry, key);
            else if (key == "min_independence")
                out.verify.minIndependence = parseReal(origin, entry, key);
            else
                throw SysFileError(origin, entry.line, "unknown [verify] key '" + key + "'");
        }
    }
    return out;
}

SystemFile loadSystemFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SysFileError(path, 0, "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parseSystemFile(buf.str(), path);
}

std::string serializeSystemFile(const IntegrableSystem& sys, const VerifyOptions* verify) {
    const PhaseChart& chart = sys.chart();
    const auto coords = chart.coordNames();
    std::ostringstream out;
    out << "[system]\n";
    out << "name = " << sys.name << "\n";
    out << "coordinates = ";
    for (std::size_t i = 0; i < chart.base.size(); ++i) {
        if (i) out << ", ";
        out << chart.base[i].name << ":" << (chart.base[i].angle ? "angle" : "real");
    }
    out << "\n";
    out << "fibers = ";
    for (std::size_t i = 0; i < chart.fiber.size(); ++i) {
        if (i) out << ", ";
        out << chart.fiber[i];
    }
    out << "\n";
    if (!chart.transverse.empty()) {
        out << "transverse = ";
        for (std::size_t i = 0; i < chart.transverse.size(); ++i) {
            if (i) out << ", ";
            out << chart.transverse[i];
        }
        out << "\n";
    }
    switch (sys.structure.kind()) {
        case StructureKind::Canonical:
            out << "structure = canonical\n";
            break;
        case StructureKind::TwistedB:
            out << "structure = twisted_b\n";
            out << "c = " << fmt17(sys.structure.modularC()) << "\n";
            out << "singular = " << coords[static_cast<std::size_t>(*sys.structure.singularIndex())]
                << "\n";
            break;
        case StructureKind::CanonicalB:
            out << "structure = canonical_b\n";
            out << "singular = " << coords[static_cast<std::size_t>(*sys.structure.singularIndex())]
                << "\n";
            break;
        case StructureKind::Custom: {
            out << "structure = custom\n";
            const int dim = chart.dim();
            for (int i = 0; i < dim; ++i)
                for (int j = i + 1; j < dim; ++j) {
                    const Expr& e = sys.structure.pi(i, j);
                    if (e.asNumber() && *e.asNumber() == 0.0) continue;
                    out << "pi_" << (i + 1) << "_" << (j + 1) << " = " << e.print(coords) << "\n";
                }
            break;
        }
    }
    out << "\n[integrals]\n";
    for (std::size_t i = 0; i < sys.integrals.size(); ++i)
        out << sys.integralNames[i] << " = " << printBFunction(sys.integrals[i], coords) << "\n";
    if (verify) {
        out << "\n[verify]\n";
        out << "samples = " << verify->samples << "\n";
        out << "seed = " << verify->seed << "\n";
        out << "box = " << fmt17(verify->box) << "\n";
        out << "tol_jacobi = " << fmt17(verify->tolJacobi) << "\n";
        out << "tol_involutivity = " << fmt17(verify->tolInvolutivity) << "\n";
        out << "min_independence = " << fmt17(verify->minIndependence) << "\n";
    }
    return out.str();
}

std::string reportToJson(const VerificationReport& rep, const IntegrableSystem& sys) {
    nlohmann::json j;
    j["jacobi"] = rep.jacobi;
    j["involutivity"]["max"] = rep.involutivityMax;
    if (rep.worstPair.first >= 0) {
        j["involutivity"]["pair"] = {
            sys.integralNames[static_cast<std::size_t>(rep.worstPair.first)],
            sys.integralNames[static_cast<std::size_t>(rep.worstPair.second)]};
        j["involutivity"]["point"] = rep.worstPoint;
    }
    j["independence"]["off_z"] = rep.independenceOffZ;
    j["independence"]["on_z"] = rep.hasZ ? nlohmann::json(rep.independenceOnZ)
                                         : nlohmann::json(nullptr);
    if (rep.hasZ) {
        j["transversality"]["pass"] = rep.transversality.pass;
        j["transversality"]["diagnostic"] = rep.transversality.diagnostic;
        j["modular_weights"] = rep.modularWeights;
    } else {
        j["transversality"] = nullptr;
        j["modular_weights"] = nlohmann::json::array();
    }
    j["pass"]["jacobi"] = rep.jacobiPass;
    j["pass"]["involutivity"] = rep.involutivityPass;
    j["pass"]["independence"] = rep.independencePass;
    j["pass"]["transversality"] = rep.transversalityPass;
    j["pass"]["all"] = rep.pass();
    return j.dump(2);
}

std::string actionReportToJson(const ActionReport& rep, const PeriodLattice& lattice) {
    nlohmann::json j;
    auto actions = nlohmann::json::array();
    for (double a : rep.actions)
        actions.push_back(std::isfinite(a) ? nlohmann::json(a) : nlohmann::json(nullptr));
    j["actions"] = actions;
    j["winding"] = rep.winding;
    if (rep.singularGenerator >= 0) {
        j["singular"]["generator"] = rep.singularGenerator;
        j["singular"]["c"] = rep.c;
        j["singular"]["form"] = rep.singularForm;
        j["modular_period"] = rep.modularPeriod;
    } else {
        j["singular"] = nullptr;
        j["modular_period"] = nullptr;
    }
    j["lattice"]["generators"] = lattice.generators;
    j["lattice"]["residuals"] = lattice.residuals;
    j["lattice"]["reduced"] = lattice.reduced;
    return j.dump(2);
}

}  // namespace liouville
