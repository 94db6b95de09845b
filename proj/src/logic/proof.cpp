#include "corgi/logic/proof.hpp"

#include "corgi/logic/builtins.hpp"
#include "corgi/logic/errors.hpp"
#include "corgi/logic/knowledge_base.hpp"

#include <sstream>

namespace corgi::logic {

namespace {

void walk_preorder(const ProofTree& n, std::vector<const ProofTree*>& out) {
    out.push_back(&n);
    for (const auto& c : n.children) walk_preorder(c, out);
}

bool depth_search(const ProofTree& n, int t, int depth, int& found) {
    if (n.t == t) {
        found = depth;
        return true;
    }
    for (const auto& c : n.children) {
        if (depth_search(c, t, depth + 1, found)) return true;
    }
    return false;
}

void render_node(const ProofTree& n, const Substitution& s, int depth, std::ostringstream& os) {
    os << std::string(static_cast<std::size_t>(depth) * 2, ' ') << "t=" << n.t << "  "
       << s.resolve(n.goal).to_string();
    if (n.clause_id) os << "  [clause " << *n.clause_id << "]";
    os << '\n';
    for (const auto& c : n.children) render_node(c, s, depth + 1, os);
}

// Generations used for replay renaming; far from anything a search hands out.
constexpr std::uint32_t kReplayBase = 0x40000000u;

bool replay_node(const ProofTree& n, const KnowledgeBase& kb, Substitution& s, std::uint32_t& gen,
                 const HeadMatcher& match) {
    if (n.is_builtin_node()) {
        if (!n.children.empty()) return false;
        try {
            auto r = eval_builtin(n.goal, s);
            if (!r) return false;
            s = std::move(*r);
        } catch (const Error&) {
            return false;
        }
        return true;
    }
    const Clause* c = kb.find(*n.clause_id);
    if (!c || c->body.size() != n.children.size()) return false;
    const std::uint32_t g = gen++;
    const Term head = c->head.renamed(g);
    if (match) {
        if (!match(n.goal, head, s)) return false;
    } else if (!unify_into(n.goal, head, s)) {
        return false;
    }
    for (std::size_t i = 0; i < c->body.size(); ++i) {
        if (!unify_into(n.children[i].goal, c->body[i].renamed(g), s)) return false;
        if (!replay_node(n.children[i], kb, s, gen, match)) return false;
    }
    return true;
}

}  // namespace

std::size_t ProofTree::node_count() const {
    std::size_t n = 1;
    for (const auto& c : children) n += c.node_count();
    return n;
}

std::vector<const ProofTree*> ProofTree::preorder() const {
    std::vector<const ProofTree*> out;
    walk_preorder(*this, out);
    return out;
}

std::vector<const ProofTree*> ProofTree::leaves() const {
    std::vector<const ProofTree*> out;
    for (const auto* n : preorder()) {
        if (n->is_leaf()) out.push_back(n);
    }
    return out;
}

int ProofTree::depth_of(int target) const {
    int found = -1;
    depth_search(*this, target, 0, found);
    return found;
}

const ProofTree* ProofTree::find(int target) const {
    for (const auto* n : preorder()) {
        if (n->t == target) return n;
    }
    return nullptr;
}

std::string render_proof(const ProofTree& proof, const Substitution& final_bindings) {
    std::ostringstream os;
    render_node(proof, final_bindings, 0, os);
    return os.str();
}

bool has_preorder_indices(const ProofTree& proof) {
    int expect = 0;
    for (const auto* n : proof.preorder()) {
        if (n->t != expect++) return false;
    }
    return true;
}

bool replays(const ProofTree& proof, const KnowledgeBase& kb, const Substitution& final_bindings,
             const HeadMatcher& match) {
    Substitution s = final_bindings;
    std::uint32_t gen = kReplayBase;
    return replay_node(proof, kb, s, gen, match);
}

bool isomorphic(const ProofTree& a, const ProofTree& b) {
    if (a.clause_id != b.clause_id || a.goal.name() != b.goal.name() || a.goal.arity() != b.goal.arity() ||
        a.children.size() != b.children.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.children.size(); ++i) {
        if (!isomorphic(a.children[i], b.children[i])) return false;
    }
    return true;
}

}  // namespace corgi::logic
