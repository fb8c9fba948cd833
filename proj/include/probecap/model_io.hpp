#pragma once

// Plain-text model files. Named sections, '#' comments, whitespace separated.
// The exact grammar is documented in the repository README. Any kernel row
// whose sum is off by more than 1e-9 is rejected with its line number.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "probecap/model.hpp"

namespace probecap {

struct ModelParseError : std::runtime_error {
    int line;
    int column;
    ModelParseError(int line_, int column_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ", col " +
                             std::to_string(column_) + ": " + msg),
          line(line_), column(column_) {}
};

namespace detail {

struct ModelToken {
    std::string text;
    int line;
    int column;
};

inline std::vector<ModelToken> tokenize_model(const std::string& text) {
    std::vector<ModelToken> out;
    int line = 1, col = 1;
    std::string cur;
    int tok_line = 0, tok_col = 0;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back({cur, tok_line, tok_col});
            cur.clear();
        }
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '#') {
            flush();
            while (i < text.size() && text[i] != '\n') ++i;
            ++line;
            col = 1;
            continue;
        }
        if (c == '\n') {
            flush();
            ++line;
            col = 1;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            flush();
            ++col;
            continue;
        }
        if (cur.empty()) {
            tok_line = line;
            tok_col = col;
        }
        cur.push_back(c);
        ++col;
    }
    flush();
    return out;
}

class ModelReader {
public:
    explicit ModelReader(std::vector<ModelToken> toks) : toks_(std::move(toks)) {}

    bool done() const { return pos_ >= toks_.size(); }
    const ModelToken& peek() const {
        if (done()) throw ModelParseError(last_line(), 1, "unexpected end of file");
        return toks_[pos_];
    }
    ModelToken next() {
        const ModelToken& t = peek();
        ++pos_;
        return t;
    }
    double next_number(const std::string& what) {
        ModelToken t = next();
        try {
            std::size_t used = 0;
            double v = std::stod(t.text, &used);
            if (used != t.text.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ModelParseError(t.line, t.column, "expected " + what + ", got '" + t.text + "'");
        }
    }
    int last_line() const { return toks_.empty() ? 1 : toks_.back().line; }

private:
    std::vector<ModelToken> toks_;
    std::size_t pos_ = 0;
};

inline std::vector<double> read_row(ModelReader& rd, int width, const std::string& what,
                                    bool normalized) {
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(width));
    int line = rd.peek().line, col = rd.peek().column;
    for (int i = 0; i < width; ++i) row.push_back(rd.next_number(what + " entry"));
    if (normalized) {
        double sum = 0.0;
        for (double v : row) sum += v;
        if (std::abs(sum - 1.0) > 1e-9)
            throw ModelParseError(line, col,
                                  what + " row sums to " + std::to_string(sum) + ", expected 1");
    }
    return row;
}

} // namespace detail

inline ProbingModel parse_model_text(const std::string& text, const std::string& name = "model") {
    using detail::ModelReader;
    ModelReader rd(detail::tokenize_model(text));

    std::vector<Alphabet> alphabets;
    auto find_alphabet = [&](const std::string& nm, int line, int col) -> const Alphabet& {
        for (const auto& a : alphabets)
            if (a.name == nm) return a;
        throw ModelParseError(line, col, "alphabet '" + nm + "' not declared");
    };

    ProbingModel m;
    m.name = name;
    bool have_state = false, have_channel = false, have_probe = false, have_cost = false,
         have_budget = false;
    std::vector<std::vector<double>> channel_rows, probe_rows;
    std::vector<double> cost_entries;

    const std::vector<std::string> required = {"S", "Se", "Sd", "Ae", "Ad", "X", "Y"};
    auto alphabets_ready = [&] {
        for (const auto& r : required) {
            bool found = false;
            for (const auto& a : alphabets)
                if (a.name == r) found = true;
            if (!found) return false;
        }
        return true;
    };

    while (!rd.done()) {
        detail::ModelToken kw = rd.next();
        if (kw.text == "alphabet") {
            detail::ModelToken nm = rd.next();
            std::vector<std::string> syms;
            while (!rd.done() && rd.peek().line == nm.line) syms.push_back(rd.next().text);
            try {
                alphabets.emplace_back(nm.text, std::move(syms));
            } catch (const std::exception& e) {
                throw ModelParseError(nm.line, nm.column, e.what());
            }
        } else if (kw.text == "state") {
            if (!alphabets_ready())
                throw ModelParseError(kw.line, kw.column, "state before all alphabets declared");
            const Alphabet& S = find_alphabet("S", kw.line, kw.column);
            std::vector<double> mass = detail::read_row(rd, S.size(), "state", true);
            m.state = ProbDist(S, std::move(mass));
            have_state = true;
        } else if (kw.text == "channel") {
            if (!alphabets_ready())
                throw ModelParseError(kw.line, kw.column, "channel before all alphabets declared");
            const Alphabet &X = find_alphabet("X", kw.line, kw.column),
                           &S = find_alphabet("S", kw.line, kw.column),
                           &Y = find_alphabet("Y", kw.line, kw.column);
            for (int i = 0; i < X.size() * S.size(); ++i)
                channel_rows.push_back(detail::read_row(rd, Y.size(), "channel", true));
            have_channel = true;
        } else if (kw.text == "probe") {
            if (!alphabets_ready())
                throw ModelParseError(kw.line, kw.column, "probe before all alphabets declared");
            const Alphabet &S = find_alphabet("S", kw.line, kw.column),
                           &Ae = find_alphabet("Ae", kw.line, kw.column),
                           &Ad = find_alphabet("Ad", kw.line, kw.column),
                           &Se = find_alphabet("Se", kw.line, kw.column),
                           &Sd = find_alphabet("Sd", kw.line, kw.column);
            for (int i = 0; i < S.size() * Ae.size() * Ad.size(); ++i)
                probe_rows.push_back(detail::read_row(rd, Se.size() * Sd.size(), "probe", true));
            have_probe = true;
        } else if (kw.text == "cost") {
            if (!alphabets_ready())
                throw ModelParseError(kw.line, kw.column, "cost before all alphabets declared");
            const Alphabet &Ae = find_alphabet("Ae", kw.line, kw.column),
                           &Ad = find_alphabet("Ad", kw.line, kw.column);
            for (int i = 0; i < Ae.size() * Ad.size(); ++i)
                cost_entries.push_back(rd.next_number("cost entry"));
            have_cost = true;
        } else if (kw.text == "budget") {
            m.budget = rd.next_number("budget");
            have_budget = true;
        } else if (kw.text == "input_constraint") {
            detail::ModelToken an = rd.next();
            if (an.text != "X")
                throw ModelParseError(an.line, an.column, "input_constraint supports only X");
            const Alphabet& X = find_alphabet("X", an.line, an.column);
            detail::ModelToken sym = rd.next();
            int xi;
            try {
                xi = X.index_of(sym.text);
            } catch (const std::exception& e) {
                throw ModelParseError(sym.line, sym.column, e.what());
            }
            double bound = rd.next_number("input constraint bound");
            m.input_constraint = InputConstraint{xi, bound};
        } else {
            throw ModelParseError(kw.line, kw.column, "unknown section '" + kw.text + "'");
        }
    }

    if (!alphabets_ready() || !have_state || !have_channel || !have_probe || !have_cost ||
        !have_budget)
        throw ModelParseError(rd.last_line(), 1,
                              "incomplete model: need alphabets S Se Sd Ae Ad X Y, state, "
                              "channel, probe, cost, budget");

    auto find = [&](const char* nm) { return find_alphabet(nm, 1, 1); };
    m.S = find("S");
    m.Se = find("Se");
    m.Sd = find("Sd");
    m.Ae = find("Ae");
    m.Ad = find("Ad");
    m.X = find("X");
    m.Y = find("Y");
    try {
        m.channel = CondKernel({m.X, m.S}, {m.Y}, std::move(channel_rows));
        m.probe = CondKernel({m.S, m.Ae, m.Ad}, {m.Se, m.Sd}, std::move(probe_rows));
        m.cost = CostTable(m.Ae.size(), m.Ad.size(), std::move(cost_entries));
        validate(m);
    } catch (const std::exception& e) {
        throw ModelParseError(rd.last_line(), 1, e.what());
    }
    return m;
}

inline ProbingModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string stem = path;
    if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos)
        stem = stem.substr(slash + 1);
    return parse_model_text(ss.str(), stem);
}

inline std::string format_model(const ProbingModel& m) {
    std::ostringstream out;
    out.precision(17);
    auto alpha = [&](const Alphabet& a) {
        out << "alphabet " << a.name;
        for (const auto& s : a.symbols) out << " " << s;
        out << "\n";
    };
    alpha(m.S);
    alpha(m.Se);
    alpha(m.Sd);
    alpha(m.Ae);
    alpha(m.Ad);
    alpha(m.X);
    alpha(m.Y);
    out << "state";
    for (double v : m.state.mass) out << " " << v;
    out << "\nchannel\n";
    for (const auto& row : m.channel.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i];
        out << "\n";
    }
    out << "probe\n";
    for (const auto& row : m.probe.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i];
        out << "\n";
    }
    out << "cost\n";
    for (int ae = 0; ae < m.cost.ae_size; ++ae) {
        for (int ad = 0; ad < m.cost.ad_size; ++ad) out << (ad ? " " : "") << m.cost.at(ae, ad);
        out << "\n";
    }
    out << "budget " << m.budget << "\n";
    if (m.input_constraint)
        out << "input_constraint X " << m.X.symbols[static_cast<std::size_t>(m.input_constraint->x_symbol)]
            << " " << m.input_constraint->bound << "\n";
    return out.str();
}

} // namespace probecap
