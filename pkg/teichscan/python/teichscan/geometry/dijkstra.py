import logging
from queue import PriorityQueue

from ..errors import StructuralError

logger = logging.getLogger(__name__)


class Dijkstra:
    """
    A class to find shortest path lengths from one surface vertex to every vertex it reaches.

    """

    def __init__(self, graph=None, start=None):
        self.graph = graph

        self.frontier = PriorityQueue()

        self.explored = {}
        self.cost = {}

        self.start = None

        if start is not None:
            self.set_start(start)

    def set_start(self, start):
        """
        Set the start vertex of the search.

        """
        self.start = self.graph.add_node(start)

    def get_edge_cost(self, edge):
        """
        Get the cost of an edge: its flat length.

        """
        return edge.get_length()

    def clear(self):
        """
        Clear the frontier and explored sets.

        """
        self.frontier.queue.clear()
        self.explored.clear()
        self.cost.clear()

    def search(self):
        """
        Runs the search from the start until every reachable node is settled.
        Returns the cost of reaching each settled node.

        """
        if self.start is None:
            raise StructuralError("Search needs a start vertex")

        # Prepare the graph for searching
        self.graph.prepare()

        # Clear the frontier and explored sets
        self.clear()

        # Initialize the frontier (The nodes to be explored)
        self.frontier.put((0, self.start))

        # Initialize the explored set (The nodes that have been explored)
        self.explored[self.start] = None

        # Initialize the cost of the path at each node
        self.cost[self.start] = 0.0

        settled = set()

        # Run the search while there are still nodes to explore
        while not self.frontier.empty():
            # Get the next node to explore
            _, current = self.frontier.get()

            if current in settled:
                continue
            settled.add(current)

            for neighbor_node, neighbor_edge in self.graph.get_neighbors(current):
                # Get the cost of the neighbor
                neighbor_cost = self.cost[current] + self.get_edge_cost(neighbor_edge)

                # If the neighbor has not been reached or the new cost is less than the old cost
                if neighbor_node not in self.cost or neighbor_cost < self.cost[neighbor_node]:
                    self.cost[neighbor_node] = neighbor_cost

                    self.explored[neighbor_node] = current

                    self.frontier.put((neighbor_cost, neighbor_node))

        logger.debug("Settled %s vertices from vertex %s", len(settled), self.start.get_vertex())

        return {node.get_vertex(): self.cost[node] for node in settled}


def all_pairs_max(graph, vertices):
    """
    Returns the largest shortest-path distance between two of the given vertices.
    NOTE: Unreachable pairs count as infinitely far.

    """
    vertices = list(vertices)
    worst = 0.0

    for vertex in vertices:
        search = Dijkstra(graph, start=vertex)
        costs = search.search()

        for other in vertices:
            worst = max(worst, costs.get(other, float("inf")))

    return worst
