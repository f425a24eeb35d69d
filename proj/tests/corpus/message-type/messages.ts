export function processMessage(type: string, data: any) {
  return `${type}:${JSON.stringify(data)}`;
}
