#include <iostream>

int main() {
  std::cout << "hall-lab: experiment runner (wired up in a later step)\n";
  return 0;
}
