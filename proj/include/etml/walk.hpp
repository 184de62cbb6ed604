#pragma once

#include "etml/ast.hpp"

namespace etml {

// Bottom-up rebuilding traversal. Overrides call the recurse_* helpers to
// descend; unchanged subtrees keep their original pointers.
class Rewriter {
public:
    virtual ~Rewriter() = default;

    virtual ExprPtr expr(const ExprPtr& e) { return recurse_expr(e); }
    virtual ModExprPtr mod(const ModExprPtr& m) { return recurse_mod(m); }
    // A declaration may expand into several.
    virtual std::vector<DeclPtr> decl(const DeclPtr& d) { return {recurse_decl(d)}; }

    std::vector<DeclPtr> decls(const std::vector<DeclPtr>& ds);

protected:
    ExprPtr recurse_expr(const ExprPtr& e);
    ModExprPtr recurse_mod(const ModExprPtr& m);
    DeclPtr recurse_decl(const DeclPtr& d);
};

// Read-only pre-order traversal.
class Visitor {
public:
    virtual ~Visitor() = default;
    virtual void expr(const ExprPtr& e) { visit_children(e); }
    virtual void mod(const ModExprPtr& m) { visit_children(m); }
    virtual void decl(const DeclPtr& d) { visit_children(d); }
    void decls(const std::vector<DeclPtr>& ds) {
        for (auto& d : ds) decl(d);
    }

protected:
    void visit_children(const ExprPtr& e);
    void visit_children(const ModExprPtr& m);
    void visit_children(const DeclPtr& d);
};

}  // namespace etml
