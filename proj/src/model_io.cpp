// Line-oriented readers and writers for the .imc and .mca formats.
// docs/format.md is the normative description.
#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "imcsynth/model.hpp"

namespace imcsynth {
namespace {

struct Token {
    std::string text;
    int column;
};

struct Line {
    int number;
    std::vector<Token> tokens;
};

std::vector<Line> tokenize(const std::string& text) {
    std::vector<Line> lines;
    int number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string raw = text.substr(pos, end - pos);
        ++number;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (auto h = raw.find('#'); h != std::string::npos) raw.resize(h);
        Line line{number, {}};
        std::size_t i = 0;
        while (i < raw.size()) {
            if (raw[i] == ' ' || raw[i] == '\t') {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < raw.size() && raw[j] != ' ' && raw[j] != '\t') ++j;
            line.tokens.push_back({raw.substr(i, j - i), static_cast<int>(i) + 1});
            i = j;
        }
        if (!line.tokens.empty()) lines.push_back(std::move(line));
        if (end == text.size()) break;
        pos = end + 1;
    }
    return lines;
}

bool is_action_name(const std::string& s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

bool is_identifier(const std::string& s) { return !s.empty() && s[0] != '-' && s.find('#') == std::string::npos; }

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = b + s.size();
    if (*b == '+') ++b;
    auto res = std::from_chars(b, e, out);
    return res.ec == std::errc() && res.ptr == e && std::isfinite(out);
}

bool parse_int(const std::string& s, int& out) {
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

[[noreturn]] void fail(const Line& l, std::size_t tok, const std::string& msg) {
    int col = tok < l.tokens.size() ? l.tokens[tok].column : 1;
    throw ParseError(l.number, col, msg);
}

bool reserved(const std::string& a) { return a == "tau" || a == "Now" || a == "Change"; }

// Arrow forms: -a->  -tau->  -(r)->  and, internally, -~tau-> -^a-> -Now-> -Change-> -[p]->
struct Arrow {
    enum Kind { Action, Rate, Split } kind = Action;
    Label label;
    bool controlled = true;
    double value = 0;
};

bool parse_arrow(const std::string& t, Arrow& a, std::string& err) {
    if (t.size() < 4 || t[0] != '-' || t.compare(t.size() - 2, 2, "->") != 0) {
        err = "expected transition arrow";
        return false;
    }
    std::string body = t.substr(1, t.size() - 3);
    if (body.size() >= 2 && body.front() == '(' && body.back() == ')') {
        a.kind = Arrow::Rate;
        if (!parse_number(body.substr(1, body.size() - 2), a.value)) {
            err = "malformed rate '" + body + "'";
            return false;
        }
        return true;
    }
    if (body.size() >= 2 && body.front() == '[' && body.back() == ']') {
        a.kind = Arrow::Split;
        if (!parse_number(body.substr(1, body.size() - 2), a.value)) {
            err = "malformed split probability '" + body + "'";
            return false;
        }
        return true;
    }
    a.kind = Arrow::Action;
    if (body == "tau") {
        a.label = Label::tau();
    } else if (body == "~tau") {
        a.label = Label::tau();
        a.controlled = false;
    } else if (body == "Now") {
        a.label = Label::now();
    } else if (body == "Change") {
        a.label = Label::change();
    } else if (!body.empty() && body[0] == '^' && is_action_name(body.substr(1)) && !reserved(body.substr(1))) {
        a.label = Label::barred(body.substr(1));
    } else if (is_action_name(body)) {
        a.label = Label::external(body);
    } else {
        err = "malformed action '" + body + "'";
        return false;
    }
    if (!a.label.is_tau()) a.controlled = false;
    return true;
}

}  // namespace

ImcModel parse_imc(const std::string& text, const ParseOptions& opt) {
    const auto lines = tokenize(text);
    ImcModel m;
    bool have_name = false, have_initial = false;
    std::map<std::string, int> ids;
    // First pass: state and action declarations, so references may precede them.
    for (const auto& l : lines) {
        const auto& kw = l.tokens[0].text;
        if (kw == "state") {
            if (l.tokens.size() < 2) fail(l, 0, "state needs at least one id");
            for (std::size_t i = 1; i < l.tokens.size(); ++i) {
                const auto& id = l.tokens[i].text;
                if (!is_identifier(id)) fail(l, i, "malformed state id '" + id + "'");
                if (ids.count(id)) fail(l, i, "duplicate state id '" + id + "'");
                ids[id] = m.add_state(id);
            }
        } else if (kw == "action") {
            if (l.tokens.size() < 2) fail(l, 0, "action needs at least one name");
            for (std::size_t i = 1; i < l.tokens.size(); ++i) {
                const auto& a = l.tokens[i].text;
                if (!is_action_name(a)) fail(l, i, "malformed action name '" + a + "'");
                if (reserved(a)) fail(l, i, "reserved name '" + a + "' cannot be declared as an action");
                m.add_action(a);
            }
        }
    }
    auto lookup = [&](const Line& l, std::size_t i) {
        auto it = ids.find(l.tokens[i].text);
        if (it == ids.end()) fail(l, i, "unknown state '" + l.tokens[i].text + "'");
        return it->second;
    };
    for (const auto& l : lines) {
        const auto& kw = l.tokens[0].text;
        if (kw == "state" || kw == "action") continue;
        if (kw == "imc") {
            if (have_name) fail(l, 0, "duplicate imc header");
            if (l.tokens.size() != 2) fail(l, 0, "expected: imc <name>");
            m.name = l.tokens[1].text;
            have_name = true;
        } else if (kw == "initial") {
            if (have_initial) fail(l, 0, "duplicate initial declaration");
            if (l.tokens.size() != 2) fail(l, 0, "expected: initial <state>");
            m.initial = lookup(l, 1);
            have_initial = true;
        } else if (kw == "goal") {
            if (l.tokens.size() < 2) fail(l, 0, "goal needs at least one id");
            for (std::size_t i = 1; i < l.tokens.size(); ++i) {
                int g = lookup(l, i);
                if (std::find(m.goal.begin(), m.goal.end(), g) == m.goal.end()) m.goal.push_back(g);
            }
        } else if (l.tokens.size() == 3 && l.tokens[1].text.size() >= 4 && l.tokens[1].text[0] == '-') {
            Arrow a;
            std::string err;
            if (!parse_arrow(l.tokens[1].text, a, err)) fail(l, 1, err);
            int src = lookup(l, 0), dst = lookup(l, 2);
            if (a.kind == Arrow::Rate) {
                if (!(a.value > 0)) fail(l, 1, "non-positive rate " + fmt_double(a.value));
                m.markovian.push_back({src, a.value, dst});
            } else if (a.kind == Arrow::Split) {
                if (!opt.allow_internal_labels) fail(l, 1, "probabilistic split edges are not allowed in user models");
                if (!(a.value > 0 && a.value <= 1)) fail(l, 1, "split probability outside (0,1]");
                m.splits.push_back({src, a.value, dst});
            } else {
                bool internal = a.label.kind == ActionKind::Barred || a.label.kind == ActionKind::Now ||
                                a.label.kind == ActionKind::Change || (a.label.is_tau() && !a.controlled);
                if (internal && !opt.allow_internal_labels)
                    fail(l, 1, "label '" + l.tokens[1].text + "' is not allowed in user models");
                if (a.label.kind == ActionKind::External) m.add_action(a.label.name);
                m.interactive.push_back({src, a.label, dst, a.controlled});
            }
        } else {
            fail(l, 0, "unrecognized line starting with '" + kw + "'");
        }
    }
    if (m.states.empty()) throw ParseError(lines.empty() ? 1 : lines.back().number, 1, "model declares no states");
    if (!have_initial) throw ParseError(lines.empty() ? 1 : lines.back().number, 1, "missing initial declaration");
    ValidationOptions vo;
    vo.max_exit_rate = opt.max_exit_rate;
    vo.allow_internal_labels = opt.allow_internal_labels;
    vo.external_cycles_ok = opt.external_cycles_ok;
    auto rep = validate(m, vo);
    if (!rep.ok()) throw ModelError(rep.issues.front());
    return m;
}

namespace {

bool parse_distribution(const std::string& s, Distribution& d, std::string& err) {
    auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')') {
        err = "unknown distribution '" + s + "'";
        return false;
    }
    std::string head = s.substr(0, open);
    std::string args = s.substr(open + 1, s.size() - open - 2);
    auto split = [](const std::string& x, char sep) {
        std::vector<std::string> out;
        std::size_t p = 0;
        while (true) {
            auto q = x.find(sep, p);
            out.push_back(x.substr(p, q == std::string::npos ? std::string::npos : q - p));
            if (q == std::string::npos) break;
            p = q + 1;
        }
        return out;
    };
    if (head == "exp") {
        double r;
        if (!parse_number(args, r) || !(r > 0)) {
            err = "malformed constraint: bad exponential rate '" + args + "'";
            return false;
        }
        d = Distribution::exponential(r);
        return true;
    }
    if (head == "erlang") {
        auto parts = split(args, ',');
        int k;
        double r;
        if (parts.size() != 2 || !parse_int(parts[0], k) || k < 1 || !parse_number(parts[1], r) || !(r > 0)) {
            err = "malformed constraint: bad erlang parameters '" + args + "'";
            return false;
        }
        d = Distribution::erlang(k, r);
        return true;
    }
    if (head == "hypererlang") {
        std::vector<ErlangBranch> br;
        double total = 0;
        for (const auto& part : split(args, ';')) {
            auto f = split(part, ',');
            ErlangBranch b;
            if (f.size() != 3 || !parse_number(f[0], b.weight) || !(b.weight > 0) || !parse_int(f[1], b.k) ||
                b.k < 1 || !parse_number(f[2], b.rate) || !(b.rate > 0)) {
                err = "malformed constraint: bad hyper-Erlang branch '" + part + "'";
                return false;
            }
            total += b.weight;
            br.push_back(b);
        }
        if (std::abs(total - 1.0) > 1e-9) {
            err = "malformed constraint: hyper-Erlang weights sum to " + fmt_double(total);
            return false;
        }
        d = Distribution::hyper_erlang(std::move(br));
        return true;
    }
    err = "unknown distribution '" + head + "'";
    return false;
}

}  // namespace

McaSpec parse_mca(const std::string& text) {
    const auto lines = tokenize(text);
    McaSpec s;
    s.flow.clear();
    bool have_name = false, have_initial = false;
    std::map<std::string, int> ids;
    std::vector<char> flow_set;
    auto loc = [&](const std::string& id) {
        auto it = ids.find(id);
        if (it != ids.end()) return it->second;
        int k = s.add_location(id);
        flow_set.push_back(0);
        ids[id] = k;
        return k;
    };
    auto loc_tok = [&](const Line& l, std::size_t i) {
        if (!is_identifier(l.tokens[i].text)) fail(l, i, "malformed location id '" + l.tokens[i].text + "'");
        return loc(l.tokens[i].text);
    };
    std::map<std::pair<int, std::string>, int> must_line;
    for (const auto& l : lines) {
        const auto& kw = l.tokens[0].text;
        if (kw == "mca") {
            if (have_name) fail(l, 0, "duplicate mca header");
            if (l.tokens.size() != 2) fail(l, 0, "expected: mca <name>");
            s.name = l.tokens[1].text;
            have_name = true;
        } else if (kw == "location") {
            if (l.tokens.size() < 2) fail(l, 0, "location needs at least one id");
            for (std::size_t i = 1; i < l.tokens.size(); ++i) {
                if (ids.count(l.tokens[i].text)) fail(l, i, "duplicate location id '" + l.tokens[i].text + "'");
                loc_tok(l, i);
            }
        } else if (kw == "action") {
            for (std::size_t i = 1; i < l.tokens.size(); ++i) {
                const auto& a = l.tokens[i].text;
                if (!is_action_name(a) || reserved(a)) fail(l, i, "malformed action name '" + a + "'");
                s.add_action(a);
            }
        } else if (kw == "initial") {
            if (have_initial) fail(l, 0, "duplicate initial declaration");
            if (l.tokens.size() != 2) fail(l, 0, "expected: initial <location>");
            s.initial = loc_tok(l, 1);
            have_initial = true;
        } else if (kw == "may" || kw == "must") {
            if (l.tokens.size() != 4) fail(l, 0, "expected: " + kw + " <src> -a-> <dst>");
            const auto& arrow = l.tokens[2].text;
            if (arrow.size() < 4 || arrow[0] != '-' || arrow.compare(arrow.size() - 2, 2, "->") != 0)
                fail(l, 2, "expected transition arrow");
            std::string a = arrow.substr(1, arrow.size() - 3);
            if (!is_action_name(a) || reserved(a)) fail(l, 2, "modal transitions need an external action, got '" + a + "'");
            int src = loc_tok(l, 1), dst = loc_tok(l, 3);
            s.add_action(a);
            auto& table = kw == "may" ? s.may : s.must;
            if (table.count({src, a})) fail(l, 0, "duplicate " + kw + " key (" + l.tokens[1].text + ", " + a + ")");
            table[{src, a}] = dst;
            if (kw == "must") must_line[{src, a}] = l.number;
        } else if (kw == "flow") {
            // flow <src> top -> <dst> | flow <src> (<=|>=) <dist> -> <dst>
            if (l.tokens.size() < 5) fail(l, 0, "expected: flow <src> [<=|>=] <dist> -> <dst>");
            int src = loc_tok(l, 1);
            TimeConstraint c;
            std::size_t arrow_at;
            if (l.tokens[2].text == "top") {
                c.top = true;
                arrow_at = 3;
            } else if (l.tokens[2].text == "<=" || l.tokens[2].text == ">=") {
                c.top = false;
                c.dir = l.tokens[2].text == "<=" ? Direction::AtMost : Direction::AtLeast;
                std::string err;
                if (!parse_distribution(l.tokens[3].text, c.dist, err)) fail(l, 3, err);
                arrow_at = 4;
            } else {
                fail(l, 2, "malformed constraint '" + l.tokens[2].text + "'");
            }
            if (l.tokens.size() != arrow_at + 2 || l.tokens[arrow_at].text != "->")
                fail(l, std::min(arrow_at, l.tokens.size() - 1), "malformed constraint: expected '-> <dst>'");
            int dst = loc_tok(l, arrow_at + 1);
            if (flow_set[src]) fail(l, 0, "duplicate flow for location '" + l.tokens[1].text + "'");
            flow_set[src] = 1;
            s.flow[src] = Flow{c, dst};
        } else {
            fail(l, 0, "unrecognized line starting with '" + kw + "'");
        }
    }
    if (s.locations.empty()) throw ParseError(1, 1, "specification declares no locations");
    if (!have_initial) throw ParseError(lines.empty() ? 1 : lines.back().number, 1, "missing initial declaration");
    for (const auto& [key, tgt] : s.must) {
        auto it = s.may.find(key);
        if (it == s.may.end() || it->second != tgt)
            throw ParseError(must_line[key], 1,
                             "must transition (" + s.locations[key.first] + ", " + key.second +
                                 ") without matching may transition");
    }
    auto issues = validate(s);
    if (!issues.empty()) throw ModelError(issues.front());
    return s;
}

std::string print_imc(const ImcModel& m) {
    std::ostringstream o;
    o << "imc " << m.name << "\n";
    if (!m.actions.empty()) {
        o << "action";
        for (const auto& a : m.actions) o << " " << a;
        o << "\n";
    }
    o << "state";
    for (const auto& s : m.states) o << " " << s;
    o << "\n";
    o << "initial " << m.states[m.initial] << "\n";
    if (!m.goal.empty()) {
        o << "goal";
        for (int g : m.goal) o << " " << m.states[g];
        o << "\n";
    }
    for (const auto& e : m.interactive) {
        std::string lab = e.label.str();
        if (e.label.is_tau() && !e.controlled) lab = "~tau";
        o << m.states[e.src] << " -" << lab << "-> " << m.states[e.dst] << "\n";
    }
    for (const auto& e : m.markovian)
        o << m.states[e.src] << " -(" << fmt_double(e.rate) << ")-> " << m.states[e.dst] << "\n";
    for (const auto& e : m.splits)
        o << m.states[e.src] << " -[" << fmt_double(e.prob) << "]-> " << m.states[e.dst] << "\n";
    return o.str();
}

std::string print_mca(const McaSpec& s) {
    std::ostringstream o;
    o << "mca " << s.name << "\n";
    o << "location";
    for (const auto& l : s.locations) o << " " << l;
    o << "\n";
    if (!s.actions.empty()) {
        o << "action";
        for (const auto& a : s.actions) o << " " << a;
        o << "\n";
    }
    o << "initial " << s.locations[s.initial] << "\n";
    for (const auto& [k, t] : s.may) o << "may " << s.locations[k.first] << " -" << k.second << "-> " << s.locations[t] << "\n";
    for (const auto& [k, t] : s.must) o << "must " << s.locations[k.first] << " -" << k.second << "-> " << s.locations[t] << "\n";
    for (int q = 0; q < s.num_locations(); ++q) {
        const auto& f = s.flow[q];
        if (f.ctc.top && f.target == q) continue;
        o << "flow " << s.locations[q] << " " << f.ctc.str() << " -> " << s.locations[f.target] << "\n";
    }
    return o.str();
}

}  // namespace imcsynth
