// Evaluates a small in-memory prediction set and prints the effort-aware
// metrics next to their classification counterparts.

#include <iostream>

#include "dpeval/dpeval.hpp"

int main() {
  const dpeval::PredictionSet set("sample", {
                                                {"Parser.java", 1200, 0.91, true, {}},
                                                {"Lexer.java", 80, 0.72, true, {}},
                                                {"Ast.java", 450, 0.64, false, {}},
                                                {"Util.java", 40, 0.55, true, {}},
                                                {"Main.java", 300, 0.20, false, {}},
                                                {"Config.java", 60, 0.10, false, {}},
                                            });

  const auto counts = dpeval::confusion_at_threshold(set, 0.5);
  std::cout << "precision  " << dpeval::precision(counts).value << '\n'
            << "recall     " << dpeval::recall(counts).value << '\n'
            << "PofB20     " << dpeval::pofb(set, 20) << '\n'
            << "NPofB20    " << dpeval::npofb(set, 20) << '\n'
            << "Popt       " << dpeval::popt(set) << '\n'
            << "Norm(Popt) " << dpeval::norm_popt(set) << '\n'
            << "IFA        " << dpeval::ifa(set) << '\n';

  std::cout << '\n';
  dpeval::emit_report(std::cout, {dpeval::evaluate(set)},
                      dpeval::evaluation_columns(dpeval::EvaluationOptions{}));
}
