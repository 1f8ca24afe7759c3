#include <qas/cli.hpp>

int main(int argc, char** argv) { return qas::cli_main(argc, argv); }
