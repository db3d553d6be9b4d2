# Independent brute-force oracles (pure Python, no package imports).
from itertools import product, combinations
import networkx as nx

def maj(a, b, c):
    return (a*b + b*c + c*a) % 2

print("maj(1,0,1) =", maj(1, 0, 1))

# Table III instance
def wants(z):
    x1, x2, x3, x4, x5, x6 = z
    return {
        "R1": (maj((x1+x6) % 2, (x2+x3) % 2, x4),),
        "R2": ((x1+x5+x6) % 2, x3),
        "R3": ((x2+x5) % 2, (x1+x3+x6) % 2),
        "R4": (x6,),
    }
has = {"R1": (1, 2), "R2": (3, 4), "R3": (2, 5), "R4": (0,)}
Z = list(product((0, 1), repeat=6))
edges = []
for a, b in combinations(Z, 2):
    wa, wb = wants(a), wants(b)
    if any(all(a[i] == b[i] for i in has[c]) and wa[c] != wb[c] for c in has):
        edges.append((a, b))
print("table3 confusion edges:", len(edges))
g = nx.Graph(); g.add_nodes_from(Z); g.add_edges_from(edges)
w = max(len(c) for c in nx.find_cliques(g))
print("table3 clique number:", w)
enc = lambda z: ((z[0]+z[5]) % 2, (z[2]+z[3]) % 2, (z[1]+z[4]) % 2)
print("encoder proper coloring:", all(enc(a) != enc(b) for a, b in edges), "classes", len({enc(z) for z in Z}))

# XOR exchange: client1 has Z1 wants Z2; client2 has Z2 wants Z1
Z2 = list(product((0, 1), repeat=2))
xe = sorted((a, b) for a, b in combinations(Z2, 2) if (a[0] == b[0] and a[1] != b[1]) or (a[1] == b[1] and a[0] != b[0]))
print("xor exchange edges:", xe)

# Fig. 2 with f_e16 := 0: sink t3 computes Y_e9 + Y_e16 = X1 + 0; demand X1 + X3
bad = [x for x in product((0, 1), repeat=4) if (x[0]) % 2 != (x[0] + x[2]) % 2]
print("fig2 e16=0 failures:", bad, "smallest:", min(bad))

# Table III truncated: encoder (C1, C2), R3's first decoded symbol forced to 0, want X2+X5
bad3 = [z for z in Z if (z[1] + z[4]) % 2 != 0]
print("table3 truncated R3 failures:", len(bad3), "smallest:", min(bad3))

# neg over q=3
print("1 vs -1 mod 3:", 1, (-1) % 3)
