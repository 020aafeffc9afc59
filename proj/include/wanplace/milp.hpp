#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace wanplace {

enum class Rel { LE, GE, EQ };

struct LinTerm {
  int var;
  double coef;
};

/// One linear constraint, named after the equation family it implements.
struct RowCon {
  std::string name;
  std::vector<LinTerm> terms;
  Rel rel = Rel::LE;
  double rhs = 0.0;
};

struct MilpVar {
  std::string name;
  double lb = 0.0;
  double ub = 0.0;
  bool is_binary = false;  // all variables here are integral; binaries are [0,1]
};

/// A small integer program: bounded integer variables, linear rows, and a
/// linear objective.
struct Milp {
  std::vector<MilpVar> vars;
  std::vector<RowCon> rows;
  std::vector<double> objective;  // dense, one coefficient per variable
  bool maximize = true;

  int add_var(std::string name, double lb, double ub, bool binary = false) {
    vars.push_back({std::move(name), lb, ub, binary});
    objective.push_back(0.0);
    return static_cast<int>(vars.size()) - 1;
  }

  void add_row(std::string name, std::vector<LinTerm> terms, Rel rel,
               double rhs) {
    rows.push_back({std::move(name), std::move(terms), rel, rhs});
  }

  double eval_terms(const RowCon& row, const std::vector<double>& x) const {
    double lhs = 0.0;
    for (const LinTerm& t : row.terms) lhs += t.coef * x[t.var];
    return lhs;
  }

  /// Whether `x` satisfies row `r` within `tol`.
  bool row_satisfied(const RowCon& row, const std::vector<double>& x,
                     double tol) const {
    const double lhs = eval_terms(row, x);
    switch (row.rel) {
      case Rel::LE:
        return lhs <= row.rhs + tol;
      case Rel::GE:
        return lhs >= row.rhs - tol;
      case Rel::EQ:
        return std::fabs(lhs - row.rhs) <= tol;
    }
    return false;
  }

  double objective_value(const std::vector<double>& x) const {
    double z = 0.0;
    for (std::size_t j = 0; j < objective.size(); ++j) z += objective[j] * x[j];
    return z;
  }

  /// Human-auditable LP-format listing; constraint names carry the source
  /// equation numbers.
  std::string to_lp_text() const {
    auto num = [](double v) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.12g", v);
      return std::string(buf);
    };
    auto terms_text = [&](const std::vector<LinTerm>& terms,
                          const std::vector<double>* dense) {
      std::ostringstream os;
      bool any = false;
      if (dense != nullptr) {
        for (std::size_t j = 0; j < dense->size(); ++j) {
          const double c = (*dense)[j];
          if (c == 0.0) continue;
          os << (c < 0 ? " - " : " + ");
          if (std::fabs(c) != 1.0) os << num(std::fabs(c)) << " ";
          os << vars[j].name;
          any = true;
        }
      } else {
        for (const LinTerm& t : terms) {
          os << (t.coef < 0 ? " - " : " + ");
          if (std::fabs(t.coef) != 1.0) os << num(std::fabs(t.coef)) << " ";
          os << vars[t.var].name;
          any = true;
        }
      }
      if (!any) os << " 0";
      return os.str();
    };

    std::ostringstream os;
    os << (maximize ? "Maximize\n" : "Minimize\n");
    os << " obj:" << terms_text({}, &objective) << "\n";
    os << "Subject To\n";
    for (const RowCon& row : rows) {
      os << " " << row.name << ":" << terms_text(row.terms, nullptr);
      switch (row.rel) {
        case Rel::LE:
          os << " <= ";
          break;
        case Rel::GE:
          os << " >= ";
          break;
        case Rel::EQ:
          os << " = ";
          break;
      }
      os << num(row.rhs) << "\n";
    }
    os << "Bounds\n";
    for (const MilpVar& v : vars) {
      os << " " << num(v.lb) << " <= " << v.name << " <= " << num(v.ub) << "\n";
    }
    os << "Generals\n";
    for (const MilpVar& v : vars) {
      if (!v.is_binary) os << " " << v.name << "\n";
    }
    os << "Binaries\n";
    for (const MilpVar& v : vars) {
      if (v.is_binary) os << " " << v.name << "\n";
    }
    os << "End\n";
    return os.str();
  }
};

}  // namespace wanplace
