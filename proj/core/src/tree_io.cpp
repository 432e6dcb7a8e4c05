#include "qkpz/tree_io.hpp"

#include <cctype>

namespace qkpz {

namespace {

struct Parser {
    const std::string& s;
    size_t pos = 0;

    explicit Parser(const std::string& text) : s(text) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool peek(char c) {
        skip_ws();
        return pos < s.size() && s[pos] == c;
    }
    bool accept(char c) {
        if (peek(c)) { ++pos; return true; }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) throw ParseError(pos, std::string("'") + c + "'");
    }
    bool accept_word(const char* w) {
        skip_ws();
        size_t n = std::string(w).size();
        if (s.compare(pos, n, w) == 0) { pos += n; return true; }
        return false;
    }
    int nat() {
        skip_ws();
        if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
            throw ParseError(pos, "natural number");
        int v = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
            v = v * 10 + (s[pos++] - '0');
        return v;
    }

    // noise := "Xi" | "One" | "X^(" nat "," nat ")" noise?
    void noise(NoiseKind& kind, MultiIndex& deco) {
        kind = NoiseKind::One;
        deco = {};
        if (accept_word("Xi")) { kind = NoiseKind::Xi; return; }
        if (accept_word("One")) return;
        if (accept_word("X^(")) {
            deco.t = nat();
            expect(',');
            deco.x = nat();
            expect(')');
            if (accept_word("Xi")) kind = NoiseKind::Xi;
            else accept_word("One");
            return;
        }
        throw ParseError(pos, "\"Xi\", \"One\" or \"X^(\"");
    }

    // edge := ("I" | "Ix" | "I^(" nat "," nat ")") ("{" nat "}")?
    ParamIndex edge() {
        skip_ws();
        ParamIndex a{};
        if (accept_word("Ix")) {
            a.st = {0, 1};
        } else if (accept_word("I^(")) {
            a.st.t = nat();
            expect(',');
            a.st.x = nat();
            expect(')');
        } else if (accept_word("I")) {
            a.st = {0, 0};
        } else {
            throw ParseError(pos, "edge \"I\", \"Ix\" or \"I^(\"");
        }
        if (accept('{')) {
            a.h = nat();
            expect('}');
        }
        return a;
    }

    TreePtr node() {
        NoiseKind kind;
        MultiIndex deco;
        noise(kind, deco);
        std::vector<Child> cs;
        if (accept('[')) {
            if (!peek(']')) {
                do {
                    ParamIndex a = edge();
                    expect('(');
                    cs.push_back({a, tree()});
                    expect(')');
                } while (accept(','));
            }
            expect(']');
        }
        return make_tree(kind, deco, std::move(cs));
    }

    TreePtr tree() {
        TreePtr t = node();
        while (accept('*')) t = tree_product(t, node());
        return t;
    }
};

std::string render_edge(const ParamIndex& a) {
    std::string r;
    if (a.st == MultiIndex{0, 0}) r = "I";
    else if (a.st == MultiIndex{0, 1}) r = "Ix";
    else r = "I^(" + std::to_string(a.st.t) + "," + std::to_string(a.st.x) + ")";
    if (a.h != 0) r += "{" + std::to_string(a.h) + "}";
    return r;
}

}  // namespace

TreePtr parse_tree(const std::string& text) {
    Parser p(text);
    TreePtr t = p.tree();
    p.skip_ws();
    if (p.pos != text.size()) throw ParseError(p.pos, "end of input");
    return t;
}

std::string render_tree(const TreePtr& tau) {
    std::string r;
    if (!tau->deco.is_zero()) {
        r += "X^(" + std::to_string(tau->deco.t) + "," + std::to_string(tau->deco.x) + ")";
        if (tau->noise == NoiseKind::Xi) r += "Xi";
    } else {
        r += tau->noise == NoiseKind::Xi ? "Xi" : "One";
    }
    if (!tau->children.empty()) {
        r += "[";
        bool first = true;
        for (const auto& c : tau->children) {
            if (!first) r += ",";
            first = false;
            r += render_edge(c.idx) + "(" + render_tree(c.sub) + ")";
        }
        r += "]";
    }
    return r;
}

nlohmann::json tree_to_json(const TreePtr& tau) {
    nlohmann::json j;
    j["noise"] = tau->noise == NoiseKind::Xi ? "Xi" : "One";
    j["nodeDecoration"] = {tau->deco.t, tau->deco.x};
    j["children"] = nlohmann::json::array();
    for (const auto& c : tau->children) {
        j["children"].push_back({{"h", c.idx.h},
                                 {"st", {c.idx.st.t, c.idx.st.x}},
                                 {"tree", tree_to_json(c.sub)}});
    }
    return j;
}

TreePtr tree_from_json(const nlohmann::json& j) {
    NoiseKind kind = j.at("noise").get<std::string>() == "Xi" ? NoiseKind::Xi
                                                              : NoiseKind::One;
    MultiIndex deco{j.at("nodeDecoration").at(0).get<int>(),
                    j.at("nodeDecoration").at(1).get<int>()};
    std::vector<Child> cs;
    for (const auto& cj : j.at("children")) {
        ParamIndex a{cj.at("h").get<int>(),
                     {cj.at("st").at(0).get<int>(), cj.at("st").at(1).get<int>()}};
        cs.push_back({a, tree_from_json(cj.at("tree"))});
    }
    return make_tree(kind, deco, std::move(cs));
}

}  // namespace qkpz
