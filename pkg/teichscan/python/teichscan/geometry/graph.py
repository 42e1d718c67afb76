from collections import UserList

from ..errors import StructuralError


class Node:
    """
    Class that represents a node in the graph. Stores the surface vertex it stands for.

    """

    def __init__(self, vertex):
        self.vertex = vertex

    def get_vertex(self):
        return self.vertex

    def __eq__(self, other):
        return isinstance(other, Node) and self.vertex == other.vertex

    def __hash__(self):
        return hash(self.vertex)

    def __lt__(self, other):
        """
        Implements the less than operator for nodes.
        NOTE: This is used to compare nodes in the priority queue.
        If two nodes have the same priority, the one with the lower vertex id is considered to be less than the other.

        """
        return self.vertex < other.vertex

    def __repr__(self):
        return f"Node({self.vertex})"


class Edge(UserList):
    """
    Class that represents an edge in the graph: a straight segment of known length between
    two vertices of the surface.
    NOTE: Loops (both ends at the same vertex) are kept; they never shorten a path.

    """

    def __init__(self, first, second, length):
        self.data = [first, second]

        self.length = length

    def get_first(self):
        return self[0]

    def get_second(self):
        return self[1]

    def get_length(self):
        return self.length


class Graph:
    """
    A weighted graph on the vertices of a surface.

    """

    def __init__(self, vertices=()):
        self.nodes = {}
        self.edges = []

        for vertex in vertices:
            self.add_node(vertex)

    def add_node(self, vertex):
        if vertex not in self.nodes:
            self.nodes[vertex] = Node(vertex)

        return self.nodes[vertex]

    def add_edge(self, first, second, length):
        """
        Adds an edge between two vertices, creating their nodes when needed.

        """
        edge = Edge(self.add_node(first), self.add_node(second), length)
        self.edges.append(edge)

        # Adjacency has to be rebuilt
        if hasattr(self, "adjacency"):
            del self.adjacency

        return edge

    def prepare(self):
        """
        Prepares a graph for searching.

        NOTE: This should be called after the graph is fully constructed.

        """
        self.adjacency = {node: [] for node in self.nodes.values()}

        for edge in self.edges:
            first = edge.get_first()
            second = edge.get_second()

            if first == second:
                continue

            self.adjacency[first].append((second, edge))
            self.adjacency[second].append((first, edge))

    def get_neighbors(self, node):
        """
        Returns the neighbors of a node on the graph.
        Returns a list of tuples of the form (node, edge).

        """
        # Check if graph has been prepared
        if not hasattr(self, "adjacency"):
            raise StructuralError("Graph has not been prepared for searching. Call prepare() before searching!")

        return self.adjacency[node]
