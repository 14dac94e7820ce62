#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace kog {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

enum class TypeKind { Bool, Any, Iface, Group, Class };

struct Type {
  TypeKind kind = TypeKind::Bool;
  std::string name;              // Iface / Class
  std::set<std::string> ifaces;  // Group

  static Type boolean() { return Type{TypeKind::Bool, {}, {}}; }
  static Type any() { return Type{TypeKind::Any, {}, {}}; }
  static Type iface(std::string n) { return Type{TypeKind::Iface, std::move(n), {}}; }
  static Type group(std::set<std::string> s) { return Type{TypeKind::Group, {}, std::move(s)}; }
  static Type cls(std::string n) { return Type{TypeKind::Class, std::move(n), {}}; }

  bool isRef() const { return kind != TypeKind::Bool; }
  bool isGroup() const { return kind == TypeKind::Group; }
  auto operator<=>(const Type&) const = default;
  std::string str() const;
};

// ---------------------------------------------------------------------------
// Runtime values (shared with the runtime engine; the AST carries them only in
// runtime-only expression forms such as rewritten call receivers)
// ---------------------------------------------------------------------------

struct Value {
  enum class Kind { Null, Bool, Obj, Grp };
  Kind kind = Kind::Null;
  bool b = false;
  uint32_t id = 0;

  static Value null() { return Value{}; }
  static Value boolean(bool v) { return Value{Kind::Bool, v, 0}; }
  static Value obj(uint32_t o) { return Value{Kind::Obj, false, o}; }
  static Value grp(uint32_t g) { return Value{Kind::Grp, false, g}; }

  auto operator<=>(const Value&) const = default;
  std::string str() const;
};

// ---------------------------------------------------------------------------
// Expressions and statements (flat: argument positions hold variable names)
// ---------------------------------------------------------------------------

enum class ExprKind { Var, BoolLit, Call, New, NewGroup, Acquire, Wait, Lit };

struct Expr {
  ExprKind kind = ExprKind::Var;
  std::string var;    // Var name; Call target var; Acquire in-var ("" = system-wide)
  std::string name;   // Call method; New class; Acquire interface; Wait method
  std::vector<std::string> args;  // Call/New argument vars; Acquire except vars
  bool boolval = false;
  bool exceptEmptyset = false;  // acquire wrote `except emptyset` explicitly
  // runtime-only forms
  std::optional<Value> target;  // Call receiver rewritten by Call3
  std::optional<Value> lit;     // Lit payload
  uint32_t waitObj = 0;         // Wait callee
  int line = 0, col = 0;
};

enum class StmtKind { Skip, Assign, If, While, Joins, Leaves, SubtypeOf, ScopeEnd };

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Stmt {
  StmtKind kind = StmtKind::Skip;
  std::string var;   // Assign target; If/While condition; Joins/Leaves/SubtypeOf x; ScopeEnd var
  std::string var2;  // Joins/Leaves y; SubtypeOf introduced variable
  Expr expr;         // Assign right-hand side
  std::vector<std::string> ifaces;  // Joins/Leaves interface list; SubtypeOf: ifaces[0]
  std::vector<StmtPtr> body1, body2;
  int line = 0, col = 0;
};

// ---------------------------------------------------------------------------
// Declarations
// ---------------------------------------------------------------------------

struct Param {
  std::string name;
  Type type;
  auto operator<=>(const Param&) const = default;
};

struct Signature {
  Type ret;
  std::string name;
  std::vector<Param> params;
  auto operator<=>(const Signature&) const = default;
  // identity used for inheritance compatibility: name, return, parameter types
  std::string shapeKey() const;
};

struct InterfaceDecl {
  std::string name;
  std::set<std::string> extends;  // always contains "Any" implicitly; stored explicit set
  std::vector<Signature> sigs;
  int line = 0, col = 0;
};

struct Block {
  std::vector<Param> locals;
  std::vector<StmtPtr> body;
};

struct Method {
  Signature sig;
  std::vector<Param> locals;
  std::vector<StmtPtr> body;
  std::string returnVar;  // names starting with '$' mark desugared void methods
  int line = 0, col = 0;
};

struct ClassDecl {
  std::string name;
  std::vector<Param> ctorParams;
  std::set<std::string> implements;
  std::vector<Param> fields;
  Block init;
  std::vector<Method> methods;
  int line = 0, col = 0;
};

struct Diag {
  std::string rule;
  std::string message;
  int line = 0, col = 0;
};

struct Program {
  std::vector<InterfaceDecl> interfaces;
  std::vector<ClassDecl> classes;
  Block mainBlock;

  // derived tables, valid after finalize()
  std::map<std::string, size_t> ifaceIdx;
  std::map<std::string, size_t> classIdx;
  // strict super-interfaces (transitive extends closure, excluding the
  // interface itself, excluding Any which is implicit)
  std::map<std::string, std::set<std::string>> supers;

  const InterfaceDecl* iface(const std::string& n) const;
  const ClassDecl* cls(const std::string& n) const;
  const Method* method(const std::string& cls, const std::string& m) const;
};

// Builds the derived tables and checks well-formedness (distinct names,
// acyclic extends, resolvable type references, signature inheritance
// compatibility). Tables are usable even when diagnostics are returned.
std::vector<Diag> finalize(Program& p);

// interface-name subtyping: a <= b under the reflexive-transitive
// extends-closure, with every interface below Any
bool ifaceLe(const Program& p, const std::string& a, const std::string& b);
bool ifaceLt(const Program& p, const std::string& a, const std::string& b);

// ---------------------------------------------------------------------------
// Lookup functions shared by the static and runtime systems
// ---------------------------------------------------------------------------

enum class Lookup { Ok, NoSuchMethod, Ambiguous, Undeclared };

// All method signatures a type offers. Iface: own plus inherited; Group:
// union over members; Class: every method the class defines; Any/Bool: none.
// nullopt when the type mentions an undeclared name.
std::optional<std::vector<Signature>> mtd(const Program& p, const Type& t);

// true iff some signature for m in mtd(t) accepts the argument types
bool matchCall(const Program& p, const std::string& m,
               const std::vector<Type>& argTypes, const Type& t);

Lookup retType(const Program& p, const Type& t, const std::string& m, Type& out);

std::optional<std::vector<Type>> ptypes(const Program& p, const std::string& cls);

// true iff I is Any or some implemented interface of C is <= I
std::optional<bool> implementsIface(const Program& p, const std::string& cls,
                                    const std::string& ifaceName);

}  // namespace kog
