// Solve the bundled four-leaf problem and print each minimum contact set.
#include <fstream>
#include <iostream>
#include <sstream>

#include "tempnet/tempnet.hpp"

int main(int argc, char** argv) {
  const char* path = argc > 1 ? argv[1] : "data/toy4.tnp";
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open " << path << "\n";
    return 2;
  }
  std::stringstream text;
  text << in.rdbuf();

  auto problem = tempnet::parse_problem(text.str(), path);
  auto report = tempnet::solve(problem, {});
  for (const auto& s : report.solutions)
    std::cout << tempnet::summary_text(problem.phylogeny, s.summary) << "\n";
  return report.solutions.empty() ? 1 : 0;
}
