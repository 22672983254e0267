int main() {
int i = 0;
int sum = 0;

while (i < 11) {
	sum = sum + i;
	i = i + 1;
}

assert(i != 0);
assert(sum != 0);
}
