#include <jkde/cli.hpp>

int main(int argc, char** argv)
{
  return jkde::cli::dispatch(argc, argv);
}
