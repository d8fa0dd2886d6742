#include "incomefit/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return incomefit::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
